#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "specmix/convergence.hpp"
#include "specmix/gmm.hpp"
#include "specmix/rng.hpp"

namespace specmix {

/// One bootstrap resample of row indices, with the complementary
/// out-of-bag mask.
struct BootstrapSample {
    std::vector<int> indices;      ///< n draws with replacement
    std::vector<bool> in_bag;      ///< size n; false marks out-of-bag rows
};

BootstrapSample draw_sample(int num_points, RandomStream& rng);

/// Reorder `candidate`'s components to best match `reference` (resamples can
/// switch labels, which would corrupt the running average): minimizes the
/// total squared distance between matched means, exhaustively over all
/// permutations up to 8 components and greedily beyond.
ParamSnapshot align_components(const ParamSnapshot& reference,
                               const ParamSnapshot& candidate);

/// Per-iteration record appended to an algorithm's trace.
struct TraceRecord {
    int iteration = 0;
    double log_likelihood = 0.0;   ///< full data under the running average
    double criterion = 0.0;        ///< stopping-rule value, if applicable
    bool converged = false;
};

/// Running state across bootstrap iterations: averaged parameters, squared
/// deviations for standard errors, likelihood histories, membership and
/// out-of-bag posterior accumulation.
struct BootstrapState {
    int iteration = 0;
    ParamSnapshot averaged;
    ParamSnapshot sq_dev_sums;               ///< running sum of squared deviations
    std::vector<double> loglik_history;      ///< full data under the average
    std::vector<double> sample_loglik_history; ///< full data under each fit
    Eigen::MatrixXd membership_sum;          ///< n x G posterior totals, every iteration
    Eigen::MatrixXd oob_sum;                 ///< n x G posterior totals while OOB
    Eigen::VectorXd oob_count;               ///< times each row was OOB
};

/// Fold one aligned estimate into the running average and deviation sums.
void update_average(BootstrapState& state, const ParamSnapshot& aligned);

/// Add the OOB rows' posteriors under the newest fit to the accumulators.
void accumulate_oob(BootstrapState& state, const Eigen::MatrixXd& posteriors,
                    const std::vector<bool>& in_bag);

/// Bootstrap standard errors sqrt(sum of squared deviations / (M - 1)).
ParamSnapshot bootstrap_std_errors(const BootstrapState& state);

/// Which rule ends the bootstrap loop.
enum class StopRule { DurbinWatson, ParamDifference };

/// Hooks the driver calls per iteration.
struct BootstrapCallbacks {
    /// Fit a model to one resample, warm-started from `labels` (the current
    /// hard memberships of the sampled rows). Returns the fitted model.
    std::function<MixtureModel(const BootstrapSample&, const std::vector<int>& labels)>
        fit_sample;
    /// Data on which per-iteration posteriors and likelihoods are evaluated
    /// for this sample (lets callers re-embed per resample). Defaults to the
    /// report data when empty.
    std::function<Eigen::MatrixXd(const BootstrapSample&)> iteration_data;
};

struct BootstrapDriverConfig {
    int num_components = 2;
    ConvergenceConfig convergence;
    StopRule stop_rule = StopRule::DurbinWatson;
    int max_bootstrap = 10000;
    int max_redraws = 20;     ///< discarded degenerate resamples before giving up
};

struct BootstrapOutcome {
    BootstrapState state;
    std::vector<TraceRecord> trace;
    bool converged = false;
};

/// Drive the bootstrap loop: draw a resample (redrawing, up to max_redraws,
/// when a fit collapses a component), fit via callbacks, align to the running
/// average, update it, accumulate OOB posteriors, record likelihoods, and
/// check the stopping rule once min_bootstrap iterations have accumulated.
/// `report_data` is the fixed matrix on which averaged-model likelihoods and
/// memberships are reported; `labels` seeds the first iteration's warm start
/// and is updated to the newest hard memberships each iteration.
BootstrapOutcome run_bootstrap(const Eigen::MatrixXd& report_data,
                               std::vector<int>& labels,
                               const BootstrapCallbacks& callbacks,
                               const BootstrapDriverConfig& cfg, RandomStream& rng);

}  // namespace specmix
