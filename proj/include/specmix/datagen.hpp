#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "specmix/gmm.hpp"

namespace specmix {

/// Simulated dataset with ground truth and flagged probe observations.
struct LabeledDataset {
    Eigen::MatrixXd data;             ///< n x p
    std::vector<int> labels;          ///< length n, values in [0, G)
    std::vector<int> special_indices; ///< probe rows (centre point, group changers)
};

/// Two antipodal Gaussian groups: n_per_group draws from N((7,...,7), I_p),
/// their exact negations as the second group, and a single probe observation
/// at the origin (equidistant from both population means). The probe carries
/// label 0 and its row index is flagged in special_indices.
LabeledDataset generate_mirror(int n_per_group = 500, int p = 150,
                               std::uint64_t seed = 1);

/// Two longitudinal groups over T time points whose means cross: group 1's
/// mean runs -20, -19, ... upward and group 2's runs 20, 19, ... downward,
/// one unit per step, under a common covariance with unit diagonal and 0.9
/// everywhere off it. n_changers extra observations follow group 1's mean for
/// the first half (time points 1..20 at the default T = 41) and group 2's
/// mean after the crossing; they carry label 0 (their starting group) and are
/// flagged in special_indices.
LabeledDataset generate_cross_over(int n_per_group = 150, int T = 41,
                                   int n_changers = 3, std::uint64_t seed = 1);

/// Generic mixture sampler: each row picks component g with probability
/// weight_g, then draws N(mean_g, cov_g) via the covariance's Cholesky factor.
LabeledDataset generate_gmm(const MixtureModel& model, int n, std::uint64_t seed);

}  // namespace specmix
