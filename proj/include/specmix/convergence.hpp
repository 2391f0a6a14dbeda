#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "specmix/gmm.hpp"

namespace specmix {

/// Thresholds shared by the stopping rules.
struct ConvergenceConfig {
    double eps = 0.1;        ///< EM lack-of-progress threshold on log-likelihood
    double eps_b = 1e-3;     ///< per-parameter relative-difference threshold
    double dw_alpha = 0.05;  ///< two-sided significance level for Durbin-Watson
    int dw_window = 500;     ///< trailing window length for Durbin-Watson
    int min_bootstrap = 300; ///< samples required before any stopping check
};

/// Flat view of a mixture's free parameters for between-iteration comparison.
struct ParamSnapshot {
    Eigen::VectorXd weights;
    Eigen::MatrixXd means;                       ///< d x G, one column per component
    std::vector<Eigen::MatrixXd> covariances;    ///< G full d x d matrices
};

ParamSnapshot snapshot_from_model(const MixtureModel& model);
MixtureModel model_from_snapshot(const ParamSnapshot& snap);

/// Sum of relative absolute parameter changes between consecutive estimates:
/// every weight, every mean coordinate, and each covariance's diagonal plus
/// strict upper triangle (symmetric entries counted once). Each term divides
/// by max(|previous value|, 1e-12).
double relative_param_difference(const ParamSnapshot& prev, const ParamSnapshot& curr);

/// True when the summed relative difference, divided by the number of free
/// parameters (G - 1) + G d + G d (d + 1) / 2, falls below eps_b.
bool check_param_convergence(double relative_difference, int num_components,
                             int dimension, const ConvergenceConfig& cfg);

/// Durbin-Watson test of first-order autocorrelation under a normal
/// approximation: mean 2, variance 4 / T, two-sided p-value.
struct DwResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Durbin-Watson statistic of `series` after removing a fitted straight-line
/// trend (ordinary least squares of value on index). Throws NumericalError if
/// the residuals are identically zero, DataError if the series has fewer than
/// three points.
DwResult durbin_watson(std::span<const double> series);

/// Stopping decision on a trailing window of `series`: nullopt while shorter
/// than cfg.dw_window, otherwise whether the window's Durbin-Watson p-value
/// fails to reject zero autocorrelation (p >= dw_alpha means settled). A
/// window whose detrended residuals vanish entirely is treated as settled.
std::optional<bool> check_dw_convergence(std::span<const double> series,
                                         const ConvergenceConfig& cfg);

}  // namespace specmix
