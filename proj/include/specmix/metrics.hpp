#pragma once

#include <vector>

#include <Eigen/Dense>

namespace specmix {

/// Cross-tabulation of two labelings.
struct ContingencyTable {
    Eigen::MatrixXi counts;  ///< true clusters x estimated clusters
};

ContingencyTable contingency_table(const std::vector<int>& true_labels,
                                   const std::vector<int>& est_labels);

/// Fraction of agreements maximized over relabelings of the estimate:
/// exhaustive permutation search up to 8 clusters, optimal assignment
/// (Hungarian method) beyond. Throws DimensionError on length mismatch.
double classification_rate(const std::vector<int>& true_labels,
                           const std::vector<int>& est_labels);

/// Hubert-Arabie adjusted Rand index via pair counting on the contingency
/// table. The degenerate case where both partitions are a single cluster
/// (expected index equals maximum index) returns 1.0 by convention.
double adjusted_rand_index(const std::vector<int>& true_labels,
                           const std::vector<int>& est_labels);

}  // namespace specmix
