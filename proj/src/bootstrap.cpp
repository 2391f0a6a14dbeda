#include "specmix/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specmix/errors.hpp"

namespace specmix {

BootstrapSample draw_sample(int num_points, RandomStream& rng) {
    if (num_points < 1) {
        throw DataError("draw_sample: n must be at least 1");
    }
    BootstrapSample sample;
    sample.indices.resize(static_cast<std::size_t>(num_points));
    sample.in_bag.assign(static_cast<std::size_t>(num_points), false);
    for (auto& idx : sample.indices) {
        idx = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(num_points)));
        sample.in_bag[static_cast<std::size_t>(idx)] = true;
    }
    return sample;
}

namespace {

ParamSnapshot permute_snapshot(const ParamSnapshot& snap, const std::vector<int>& perm) {
    ParamSnapshot out = snap;
    for (std::size_t g = 0; g < perm.size(); ++g) {
        const auto src = static_cast<std::size_t>(perm[g]);
        out.weights(static_cast<Eigen::Index>(g)) = snap.weights(static_cast<Eigen::Index>(src));
        out.means.col(static_cast<Eigen::Index>(g)) = snap.means.col(static_cast<Eigen::Index>(src));
        out.covariances[g] = snap.covariances[src];
    }
    return out;
}

}  // namespace

ParamSnapshot align_components(const ParamSnapshot& reference,
                               const ParamSnapshot& candidate) {
    const int num_groups = static_cast<int>(reference.weights.size());
    if (static_cast<int>(candidate.weights.size()) != num_groups ||
        candidate.means.rows() != reference.means.rows()) {
        throw DimensionError("align_components: snapshot shapes differ");
    }

    Eigen::MatrixXd cost(num_groups, num_groups);
    for (int g = 0; g < num_groups; ++g) {
        for (int h = 0; h < num_groups; ++h) {
            cost(g, h) = (reference.means.col(g) - candidate.means.col(h)).squaredNorm();
        }
    }

    std::vector<int> best(static_cast<std::size_t>(num_groups));
    std::iota(best.begin(), best.end(), 0);
    if (num_groups <= 8) {
        std::vector<int> perm = best;
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (int g = 0; g < num_groups; ++g) {
                total += cost(g, perm[static_cast<std::size_t>(g)]);
            }
            if (total < best_cost) {
                best_cost = total;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        // Greedy fallback: repeatedly take the globally cheapest unused pair.
        std::vector<bool> ref_used(static_cast<std::size_t>(num_groups), false);
        std::vector<bool> cand_used(static_cast<std::size_t>(num_groups), false);
        for (int round = 0; round < num_groups; ++round) {
            int arg_g = -1, arg_h = -1;
            double min_cost = std::numeric_limits<double>::infinity();
            for (int g = 0; g < num_groups; ++g) {
                if (ref_used[static_cast<std::size_t>(g)]) continue;
                for (int h = 0; h < num_groups; ++h) {
                    if (cand_used[static_cast<std::size_t>(h)]) continue;
                    if (cost(g, h) < min_cost) {
                        min_cost = cost(g, h);
                        arg_g = g;
                        arg_h = h;
                    }
                }
            }
            best[static_cast<std::size_t>(arg_g)] = arg_h;
            ref_used[static_cast<std::size_t>(arg_g)] = true;
            cand_used[static_cast<std::size_t>(arg_h)] = true;
        }
    }
    return permute_snapshot(candidate, best);
}

namespace {

/// Apply op element-wise across every parameter of two equally shaped snapshots.
template <typename Op>
void zip_params(ParamSnapshot& acc, const ParamSnapshot& other, Op op) {
    for (Eigen::Index g = 0; g < acc.weights.size(); ++g) {
        op(acc.weights(g), other.weights(g));
    }
    for (Eigen::Index j = 0; j < acc.means.size(); ++j) {
        op(acc.means.data()[j], other.means.data()[j]);
    }
    for (std::size_t g = 0; g < acc.covariances.size(); ++g) {
        for (Eigen::Index j = 0; j < acc.covariances[g].size(); ++j) {
            op(acc.covariances[g].data()[j], other.covariances[g].data()[j]);
        }
    }
}

ParamSnapshot zero_like(const ParamSnapshot& snap) {
    ParamSnapshot out = snap;
    out.weights.setZero();
    out.means.setZero();
    for (auto& cov : out.covariances) cov.setZero();
    return out;
}

}  // namespace

void update_average(BootstrapState& state, const ParamSnapshot& aligned) {
    ++state.iteration;
    if (state.iteration == 1) {
        state.averaged = aligned;
        state.sq_dev_sums = zero_like(aligned);
        return;
    }
    // Welford: mean += (x - mean)/k, M2 += (x - mean_old)(x - mean_new),
    // so sq_dev_sums always holds the squared deviations about the current mean.
    const double k = static_cast<double>(state.iteration);
    ParamSnapshot old_mean = state.averaged;
    zip_params(state.averaged, aligned,
               [k](double& mean, double x) { mean += (x - mean) / k; });
    ParamSnapshot delta_old = aligned;
    zip_params(delta_old, old_mean, [](double& x, double old_m) { x -= old_m; });
    ParamSnapshot delta_new = aligned;
    zip_params(delta_new, state.averaged, [](double& x, double new_m) { x -= new_m; });
    zip_params(delta_old, delta_new, [](double& a, double b) { a *= b; });
    zip_params(state.sq_dev_sums, delta_old, [](double& acc, double term) { acc += term; });
}

void accumulate_oob(BootstrapState& state, const Eigen::MatrixXd& posteriors,
                    const std::vector<bool>& in_bag) {
    if (static_cast<std::size_t>(posteriors.rows()) != in_bag.size()) {
        throw DimensionError("accumulate_oob: mask length does not match posterior rows");
    }
    if (state.oob_sum.rows() != posteriors.rows()) {
        state.oob_sum = Eigen::MatrixXd::Zero(posteriors.rows(), posteriors.cols());
        state.oob_count = Eigen::VectorXd::Zero(posteriors.rows());
    }
    for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
        if (!in_bag[static_cast<std::size_t>(i)]) {
            state.oob_sum.row(i) += posteriors.row(i);
            state.oob_count(i) += 1.0;
        }
    }
}

ParamSnapshot bootstrap_std_errors(const BootstrapState& state) {
    if (state.iteration < 2) {
        throw DataError("bootstrap_std_errors: need at least 2 iterations");
    }
    ParamSnapshot out = state.sq_dev_sums;
    const double denom = static_cast<double>(state.iteration - 1);
    ParamSnapshot dummy = out;
    zip_params(out, dummy, [denom](double& v, double) { v = std::sqrt(v / denom); });
    return out;
}

BootstrapOutcome run_bootstrap(const Eigen::MatrixXd& report_data,
                               std::vector<int>& labels,
                               const BootstrapCallbacks& callbacks,
                               const BootstrapDriverConfig& cfg, RandomStream& rng) {
    const int n = static_cast<int>(report_data.rows());
    if (static_cast<int>(labels.size()) != n) {
        throw DimensionError("run_bootstrap: label length does not match data rows");
    }

    BootstrapOutcome outcome;
    BootstrapState& state = outcome.state;
    state.membership_sum = Eigen::MatrixXd::Zero(n, cfg.num_components);
    state.oob_sum = Eigen::MatrixXd::Zero(n, cfg.num_components);
    state.oob_count = Eigen::VectorXd::Zero(n);

    for (int k = 1; k <= cfg.max_bootstrap; ++k) {
        // Fit one resample, redrawing when the warm start collapses a group.
        MixtureModel model;
        BootstrapSample sample;
        int redraws = 0;
        while (true) {
            sample = draw_sample(n, rng);
            std::vector<int> sample_labels(sample.indices.size());
            for (std::size_t j = 0; j < sample.indices.size(); ++j) {
                sample_labels[j] = labels[static_cast<std::size_t>(sample.indices[j])];
            }
            try {
                model = callbacks.fit_sample(sample, sample_labels);
                break;
            } catch (const Error&) {
                if (++redraws > cfg.max_redraws) {
                    throw NumericalError(
                        "bootstrap sample " + std::to_string(k) + " kept degenerating after " +
                        std::to_string(cfg.max_redraws) + " redraws");
                }
            }
        }

        // Full-data posteriors in this iteration's space: warm start for the
        // next sample, OOB accumulation, and the per-sample likelihood record.
        const Eigen::MatrixXd eval_data =
            callbacks.iteration_data ? callbacks.iteration_data(sample) : report_data;
        const EStepResult eval = e_step(model, eval_data);
        state.sample_loglik_history.push_back(eval.log_likelihood);
        state.membership_sum += eval.resp.matrix;
        accumulate_oob(state, eval.resp.matrix, sample.in_bag);
        labels = harden(eval.resp);

        const ParamSnapshot fitted = snapshot_from_model(model);
        const ParamSnapshot prev_average = state.averaged;
        update_average(state, k == 1 ? fitted : align_components(state.averaged, fitted));

        const MixtureModel averaged_model = model_from_snapshot(state.averaged);
        state.loglik_history.push_back(
            e_step(averaged_model, report_data).log_likelihood);

        TraceRecord record;
        record.iteration = k;
        record.log_likelihood = state.loglik_history.back();
        if (cfg.stop_rule == StopRule::ParamDifference) {
            if (k > 1) {
                record.criterion = relative_param_difference(prev_average, state.averaged);
                record.converged =
                    k >= cfg.convergence.min_bootstrap &&
                    check_param_convergence(record.criterion, cfg.num_components,
                                            static_cast<int>(report_data.cols()),
                                            cfg.convergence);
            }
        } else if (k >= cfg.convergence.min_bootstrap) {
            const auto settled = check_dw_convergence(state.sample_loglik_history,
                                                      cfg.convergence);
            if (settled.has_value()) {
                const auto window = std::span<const double>(state.sample_loglik_history)
                                        .subspan(state.sample_loglik_history.size() -
                                                 static_cast<std::size_t>(cfg.convergence.dw_window));
                try {
                    record.criterion = durbin_watson(window).statistic;
                } catch (const NumericalError&) {
                    record.criterion = 2.0;  // flat window: no autocorrelation left
                }
                record.converged = *settled;
            }
        }
        outcome.trace.push_back(record);
        if (record.converged) {
            outcome.converged = true;
            break;
        }
    }
    return outcome;
}

}  // namespace specmix
