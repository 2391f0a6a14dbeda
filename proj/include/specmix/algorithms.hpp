#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specmix/bootstrap.hpp"
#include "specmix/convergence.hpp"
#include "specmix/gmm.hpp"

namespace specmix {

enum class Algorithm { Em, SpectralEm, BootEm, SpectralBootEm, BootSpectral };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm algorithm);

/// Shared knobs for all fitting algorithms. Defaults follow the reference
/// experimental setup; bootstrap-specific fields are ignored by plain EM.
struct RunConfig {
    int num_components = 2;
    double eps = 0.1;              ///< EM lack-of-progress threshold
    double eps_b = 1e-3;           ///< bootstrap parameter-difference threshold
    double dw_alpha = 0.05;
    int dw_window = 500;
    /// Floor before stopping checks; unset picks the per-algorithm default
    /// (500 for the raw-space bootstrap, 300 for the spectral variants).
    std::optional<int> min_bootstrap;
    int max_bootstrap = 10000;
    int max_iter = 1000;           ///< inner EM iteration cap
    std::uint64_t seed = 1;
    InitStrategy init = InitStrategy::KMeans;
    int full_svd_threshold = 512;
};

enum class EstimationSpace { Original, Spectral };

/// Uniform result of any algorithm run.
struct FitResult {
    MixtureModel model;                        ///< final estimate (averaged for bootstrap)
    Eigen::MatrixXd memberships;               ///< n x G posterior memberships, rows sum to 1
    std::optional<Eigen::MatrixXd> oob_memberships; ///< OOB posterior means (bootstrap only)
    double log_likelihood = 0.0;               ///< reported data under `model`
    std::optional<int> bootstrap_iterations;
    double elapsed_seconds = 0.0;
    std::vector<TraceRecord> trace;
    EstimationSpace space = EstimationSpace::Original;
    int estimation_dim = 0;                    ///< columns of the fitted space
    std::optional<ParamSnapshot> std_errors;   ///< bootstrap standard errors
    long svd_count = 0;                        ///< decompositions performed
    std::vector<int> never_oob;                ///< rows that were in-bag every time

    std::vector<int> hard_labels() const;      ///< row argmax, ties to lowest index
};

FitResult run_em(const Eigen::MatrixXd& data, const RunConfig& cfg);
FitResult run_spectral_em(const Eigen::MatrixXd& data, const RunConfig& cfg);
FitResult run_boot_em(const Eigen::MatrixXd& data, const RunConfig& cfg);
FitResult run_spectral_boot_em(const Eigen::MatrixXd& data, const RunConfig& cfg);
FitResult run_boot_spectral(const Eigen::MatrixXd& data, const RunConfig& cfg);

/// Dispatch on the Algorithm tag.
FitResult run_algorithm(Algorithm algorithm, const Eigen::MatrixXd& data,
                        const RunConfig& cfg);

}  // namespace specmix
