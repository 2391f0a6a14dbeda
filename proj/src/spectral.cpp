#include "specmix/spectral.hpp"

#include <atomic>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "specmix/errors.hpp"

namespace specmix {

namespace {

std::atomic<long> g_svd_invocations{0};

/// Make each column's largest-magnitude entry positive; ties go to the lowest
/// row so repeated runs pick the same representative.
void fix_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            const double mag = std::abs(basis(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
    }
}

/// Replace near-zero basis columns (rank-deficient input) with canonical axis
/// vectors orthogonalized against the columns already kept.
void complete_rank_deficient(Eigen::MatrixXd& basis, const Eigen::VectorXd& sigma,
                             double tol) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        if (sigma(j) > tol) continue;
        bool placed = false;
        for (Eigen::Index axis = 0; axis < basis.rows() && !placed; ++axis) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.rows());
            v(axis) = 1.0;
            for (Eigen::Index k = 0; k < basis.cols(); ++k) {
                if (k == j) continue;
                v -= basis.col(k).dot(v) * basis.col(k);
            }
            const double norm = v.norm();
            if (norm > 1e-8) {
                basis.col(j) = v / norm;
                placed = true;
            }
        }
        if (!placed) {
            throw NumericalError("cannot complete orthonormal basis for rank-deficient data");
        }
    }
}

}  // namespace

long svd_invocations() { return g_svd_invocations.load(); }
void reset_svd_invocations() { g_svd_invocations.store(0); }

SpectralEmbedding spectral_transform(const Eigen::MatrixXd& data, int num_groups,
                                     int full_svd_threshold) {
    const Eigen::Index n = data.rows();
    const Eigen::Index p = data.cols();
    if (n == 0 || p == 0) {
        throw DataError("spectral_transform: empty data matrix");
    }
    if (!data.allFinite()) {
        throw DataError("spectral_transform: data contains non-finite values");
    }
    if (num_groups < 1 || num_groups > std::min(n, p)) {
        throw DimensionError("spectral_transform: num_groups must be in [1, min(n, p)]");
    }
    ++g_svd_invocations;

    const Eigen::Index g = num_groups;
    SpectralEmbedding result;

    if (std::max(n, p) <= full_svd_threshold) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinV);
        result.basis = svd.matrixV().leftCols(g);
        result.singular_values = svd.singularValues().head(g);
    } else if (p <= n) {
        // Eigendecomposition of the p x p Gram matrix X'X: eigenvectors are the
        // right-singular vectors, eigenvalues the squared singular values.
        const Eigen::MatrixXd gram = data.transpose() * data;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("spectral_transform: eigendecomposition failed");
        }
        result.basis.resize(p, g);
        result.singular_values.resize(g);
        for (Eigen::Index j = 0; j < g; ++j) {
            const Eigen::Index src = p - 1 - j;  // eigenvalues come ascending
            result.basis.col(j) = eig.eigenvectors().col(src);
            result.singular_values(j) = std::sqrt(std::max(0.0, eig.eigenvalues()(src)));
        }
    } else {
        // Wide case: eigendecompose the n x n Gram matrix XX', then recover
        // right-singular vectors as X'u / sigma.
        const Eigen::MatrixXd gram = data * data.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("spectral_transform: eigendecomposition failed");
        }
        result.basis.resize(p, g);
        result.singular_values.resize(g);
        for (Eigen::Index j = 0; j < g; ++j) {
            const Eigen::Index src = n - 1 - j;
            const double sigma = std::sqrt(std::max(0.0, eig.eigenvalues()(src)));
            result.singular_values(j) = sigma;
            if (sigma > 1e-12) {
                result.basis.col(j) = (data.transpose() * eig.eigenvectors().col(src)) / sigma;
            } else {
                result.basis.col(j).setZero();
            }
        }
    }

    const double tol = 1e-12 * std::max(1.0, result.singular_values.size() > 0
                                                 ? result.singular_values(0)
                                                 : 0.0);
    complete_rank_deficient(result.basis, result.singular_values, tol);
    fix_signs(result.basis);
    result.embedded = data * result.basis;
    return result;
}

}  // namespace specmix
