#pragma once

#include <Eigen/Dense>

namespace specmix {

/// Result of projecting data onto its leading right-singular directions.
struct SpectralEmbedding {
    Eigen::MatrixXd embedded;         ///< n x G projected coordinates
    Eigen::MatrixXd basis;            ///< p x G orthonormal right-singular vectors
    Eigen::VectorXd singular_values;  ///< leading G singular values, descending
};

/// Project `data` (n x p) onto its top `num_groups` right-singular vectors.
///
/// Matrices fitting inside a `full_svd_threshold`-square box use a dense SVD;
/// larger problems go through an eigendecomposition of the smaller Gram
/// matrix, which only ever materializes a min(n,p) x min(n,p) product — the
/// bootstrapped spectral estimators decompose per resample, so this path is
/// what keeps them fast. Singular-vector sign is fixed so each basis column's
/// largest-magnitude entry is positive (ties broken toward the lowest row
/// index), making the embedding deterministic.
///
/// Throws DimensionError if num_groups < 1 or exceeds min(n, p), DataError on
/// empty or non-finite input.
SpectralEmbedding spectral_transform(const Eigen::MatrixXd& data, int num_groups,
                                     int full_svd_threshold = 512);

/// Number of spectral_transform calls since process start (or last reset).
/// Used to verify how often algorithms recompute the decomposition.
long svd_invocations();
void reset_svd_invocations();

}  // namespace specmix
