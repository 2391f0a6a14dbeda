#include "specmix/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "specmix/errors.hpp"
#include "specmix/spectral.hpp"

namespace specmix {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> initial_labels(const Eigen::MatrixXd& data, const RunConfig& cfg,
                                RandomStream& rng) {
    if (cfg.init == InitStrategy::KMeans) {
        return kmeans_labels(data, cfg.num_components, rng);
    }
    std::vector<int> labels(static_cast<std::size_t>(data.rows()));
    for (auto& l : labels) {
        l = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(cfg.num_components)));
    }
    return labels;
}

std::vector<TraceRecord> em_trace_records(const EmTrace& trace) {
    std::vector<TraceRecord> records;
    records.reserve(trace.log_likelihoods.size());
    for (std::size_t k = 0; k < trace.log_likelihoods.size(); ++k) {
        TraceRecord rec;
        rec.iteration = static_cast<int>(k + 1);
        rec.log_likelihood = trace.log_likelihoods[k];
        rec.criterion = k > 0 ? std::abs(trace.log_likelihoods[k] - trace.log_likelihoods[k - 1])
                              : 0.0;
        rec.converged = trace.converged && k + 1 == trace.log_likelihoods.size();
        records.push_back(rec);
    }
    return records;
}

Eigen::MatrixXd rows_at(const Eigen::MatrixXd& data, const std::vector<int>& indices) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), data.cols());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        out.row(static_cast<Eigen::Index>(j)) = data.row(indices[j]);
    }
    return out;
}

ConvergenceConfig convergence_from(const RunConfig& cfg, int default_min_bootstrap) {
    ConvergenceConfig conv;
    conv.eps = cfg.eps;
    conv.eps_b = cfg.eps_b;
    conv.dw_alpha = cfg.dw_alpha;
    conv.dw_window = cfg.dw_window;
    conv.min_bootstrap = cfg.min_bootstrap.value_or(default_min_bootstrap);
    return conv;
}

/// Shared tail of the three bootstrapped estimators: run the driver, then
/// report everything under the averaged parameters.
FitResult finish_bootstrap(const Eigen::MatrixXd& report_data,
                           std::vector<int>& labels, const BootstrapCallbacks& callbacks,
                           const BootstrapDriverConfig& driver_cfg, RandomStream& rng) {
    BootstrapOutcome outcome = run_bootstrap(report_data, labels, callbacks, driver_cfg, rng);
    const BootstrapState& state = outcome.state;

    FitResult result;
    result.model = model_from_snapshot(state.averaged);
    // The log-likelihood is reported under the averaged parameters, but the
    // reported memberships are the per-iteration posteriors averaged over the
    // whole run: a point that genuinely sits between two groups flips sides
    // from resample to resample, and only the average reflects that.
    result.log_likelihood = e_step(result.model, report_data).log_likelihood;
    result.memberships = state.membership_sum / static_cast<double>(state.iteration);
    result.bootstrap_iterations = state.iteration;
    result.trace = std::move(outcome.trace);
    result.std_errors = bootstrap_std_errors(state);

    Eigen::MatrixXd oob = state.oob_sum;
    for (Eigen::Index i = 0; i < oob.rows(); ++i) {
        if (state.oob_count(i) > 0.0) {
            oob.row(i) /= state.oob_count(i);
        } else {
            oob.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
            result.never_oob.push_back(static_cast<int>(i));
        }
    }
    result.oob_memberships = std::move(oob);
    return result;
}

}  // namespace

std::vector<int> FitResult::hard_labels() const {
    return harden(Responsibilities{memberships});
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "em") return Algorithm::Em;
    if (name == "spectral-em") return Algorithm::SpectralEm;
    if (name == "boot-em") return Algorithm::BootEm;
    if (name == "spectral-boot-em") return Algorithm::SpectralBootEm;
    if (name == "boot-spectral") return Algorithm::BootSpectral;
    throw DataError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::Em: return "em";
        case Algorithm::SpectralEm: return "spectral-em";
        case Algorithm::BootEm: return "boot-em";
        case Algorithm::SpectralBootEm: return "spectral-boot-em";
        case Algorithm::BootSpectral: return "boot-spectral";
    }
    throw DataError("unknown algorithm tag");
}

FitResult run_em(const Eigen::MatrixXd& data, const RunConfig& cfg) {
    const auto start = Clock::now();
    const long svd_before = svd_invocations();
    RandomStream rng(cfg.seed);

    const std::vector<int> labels = initial_labels(data, cfg, rng);
    EmFit fit = fit_em(data, cfg.num_components, one_hot(labels, cfg.num_components),
                       cfg.eps, cfg.max_iter);

    FitResult result;
    result.model = std::move(fit.model);
    result.memberships = std::move(fit.resp.matrix);
    result.log_likelihood = fit.trace.log_likelihoods.back();
    result.trace = em_trace_records(fit.trace);
    result.space = EstimationSpace::Original;
    result.estimation_dim = static_cast<int>(data.cols());
    result.svd_count = svd_invocations() - svd_before;
    result.elapsed_seconds = seconds_since(start);
    return result;
}

FitResult run_spectral_em(const Eigen::MatrixXd& data, const RunConfig& cfg) {
    const auto start = Clock::now();
    const long svd_before = svd_invocations();
    RandomStream rng(cfg.seed);

    const SpectralEmbedding emb =
        spectral_transform(data, cfg.num_components, cfg.full_svd_threshold);
    const std::vector<int> labels = initial_labels(emb.embedded, cfg, rng);
    EmFit fit = fit_em(emb.embedded, cfg.num_components,
                       one_hot(labels, cfg.num_components), cfg.eps, cfg.max_iter);

    FitResult result;
    result.model = std::move(fit.model);
    result.memberships = std::move(fit.resp.matrix);
    result.log_likelihood = fit.trace.log_likelihoods.back();
    result.trace = em_trace_records(fit.trace);
    result.space = EstimationSpace::Spectral;
    result.estimation_dim = cfg.num_components;
    result.svd_count = svd_invocations() - svd_before;
    result.elapsed_seconds = seconds_since(start);
    return result;
}

FitResult run_boot_em(const Eigen::MatrixXd& data, const RunConfig& cfg) {
    const auto start = Clock::now();
    const long svd_before = svd_invocations();
    RandomStream rng(cfg.seed);

    std::vector<int> labels = initial_labels(data, cfg, rng);

    BootstrapDriverConfig driver_cfg;
    driver_cfg.num_components = cfg.num_components;
    driver_cfg.convergence = convergence_from(cfg, 500);
    driver_cfg.stop_rule = StopRule::DurbinWatson;
    driver_cfg.max_bootstrap = cfg.max_bootstrap;

    BootstrapCallbacks callbacks;
    callbacks.fit_sample = [&](const BootstrapSample& sample,
                               const std::vector<int>& sample_labels) {
        const Eigen::MatrixXd sampled = rows_at(data, sample.indices);
        return fit_em(sampled, cfg.num_components,
                      one_hot(sample_labels, cfg.num_components), cfg.eps, cfg.max_iter)
            .model;
    };

    FitResult result = finish_bootstrap(data, labels, callbacks, driver_cfg, rng);
    result.space = EstimationSpace::Original;
    result.estimation_dim = static_cast<int>(data.cols());
    result.svd_count = svd_invocations() - svd_before;
    result.elapsed_seconds = seconds_since(start);
    return result;
}

FitResult run_spectral_boot_em(const Eigen::MatrixXd& data, const RunConfig& cfg) {
    const auto start = Clock::now();
    const long svd_before = svd_invocations();
    RandomStream rng(cfg.seed);

    const SpectralEmbedding emb =
        spectral_transform(data, cfg.num_components, cfg.full_svd_threshold);
    std::vector<int> labels = initial_labels(emb.embedded, cfg, rng);

    BootstrapDriverConfig driver_cfg;
    driver_cfg.num_components = cfg.num_components;
    driver_cfg.convergence = convergence_from(cfg, 300);
    driver_cfg.stop_rule = StopRule::ParamDifference;
    driver_cfg.max_bootstrap = cfg.max_bootstrap;

    BootstrapCallbacks callbacks;
    callbacks.fit_sample = [&](const BootstrapSample& sample,
                               const std::vector<int>& sample_labels) {
        const Eigen::MatrixXd sampled = rows_at(emb.embedded, sample.indices);
        return fit_em(sampled, cfg.num_components,
                      one_hot(sample_labels, cfg.num_components), cfg.eps, cfg.max_iter)
            .model;
    };

    FitResult result = finish_bootstrap(emb.embedded, labels, callbacks, driver_cfg, rng);
    result.space = EstimationSpace::Spectral;
    result.estimation_dim = cfg.num_components;
    result.svd_count = svd_invocations() - svd_before;
    result.elapsed_seconds = seconds_since(start);
    return result;
}

FitResult run_boot_spectral(const Eigen::MatrixXd& data, const RunConfig& cfg) {
    const auto start = Clock::now();
    const long svd_before = svd_invocations();
    RandomStream rng(cfg.seed);

    const SpectralEmbedding initial_emb =
        spectral_transform(data, cfg.num_components, cfg.full_svd_threshold);
    std::vector<int> labels = initial_labels(initial_emb.embedded, cfg, rng);

    BootstrapDriverConfig driver_cfg;
    driver_cfg.num_components = cfg.num_components;
    driver_cfg.convergence = convergence_from(cfg, 300);
    driver_cfg.stop_rule = StopRule::ParamDifference;
    driver_cfg.max_bootstrap = cfg.max_bootstrap;

    // Each iteration re-decomposes the sampled raw rows; the fit happens in
    // that sample's own spectral space, and the full data is carried into the
    // same space for memberships and likelihood bookkeeping.
    Eigen::MatrixXd full_embedding_for_sample;
    BootstrapCallbacks callbacks;
    callbacks.fit_sample = [&](const BootstrapSample& sample,
                               const std::vector<int>& sample_labels) {
        const Eigen::MatrixXd sampled_raw = rows_at(data, sample.indices);
        const SpectralEmbedding sample_emb =
            spectral_transform(sampled_raw, cfg.num_components, cfg.full_svd_threshold);
        full_embedding_for_sample = data * sample_emb.basis;
        return fit_em(sample_emb.embedded, cfg.num_components,
                      one_hot(sample_labels, cfg.num_components), cfg.eps, cfg.max_iter)
            .model;
    };
    callbacks.iteration_data = [&](const BootstrapSample&) {
        return full_embedding_for_sample;
    };

    FitResult result =
        finish_bootstrap(initial_emb.embedded, labels, callbacks, driver_cfg, rng);
    result.space = EstimationSpace::Spectral;
    result.estimation_dim = cfg.num_components;
    result.svd_count = svd_invocations() - svd_before;
    result.elapsed_seconds = seconds_since(start);
    return result;
}

FitResult run_algorithm(Algorithm algorithm, const Eigen::MatrixXd& data,
                        const RunConfig& cfg) {
    switch (algorithm) {
        case Algorithm::Em: return run_em(data, cfg);
        case Algorithm::SpectralEm: return run_spectral_em(data, cfg);
        case Algorithm::BootEm: return run_boot_em(data, cfg);
        case Algorithm::SpectralBootEm: return run_spectral_boot_em(data, cfg);
        case Algorithm::BootSpectral: return run_boot_spectral(data, cfg);
    }
    throw DataError("unknown algorithm tag");
}

}  // namespace specmix
