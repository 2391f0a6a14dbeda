#include "specmix/convergence.hpp"

#include <cmath>
#include <numbers>

#include "specmix/errors.hpp"

namespace specmix {

ParamSnapshot snapshot_from_model(const MixtureModel& model) {
    const int num_groups = model.num_components();
    const int d = model.dimension();
    ParamSnapshot snap;
    snap.weights.resize(num_groups);
    snap.means.resize(d, num_groups);
    snap.covariances.resize(static_cast<std::size_t>(num_groups));
    for (int g = 0; g < num_groups; ++g) {
        const auto& comp = model.components[static_cast<std::size_t>(g)];
        snap.weights(g) = comp.weight;
        snap.means.col(g) = comp.mean;
        snap.covariances[static_cast<std::size_t>(g)] = comp.covariance;
    }
    return snap;
}

MixtureModel model_from_snapshot(const ParamSnapshot& snap) {
    MixtureModel model;
    const int num_groups = static_cast<int>(snap.weights.size());
    model.components.resize(static_cast<std::size_t>(num_groups));
    for (int g = 0; g < num_groups; ++g) {
        auto& comp = model.components[static_cast<std::size_t>(g)];
        comp.weight = snap.weights(g);
        comp.mean = snap.means.col(g);
        comp.covariance = snap.covariances[static_cast<std::size_t>(g)];
    }
    return model;
}

double relative_param_difference(const ParamSnapshot& prev, const ParamSnapshot& curr) {
    if (prev.weights.size() != curr.weights.size() ||
        prev.means.rows() != curr.means.rows() ||
        prev.covariances.size() != curr.covariances.size()) {
        throw DimensionError("parameter snapshots have different shapes");
    }
    const auto rel = [](double before, double after) {
        return std::abs(after - before) / std::max(std::abs(before), 1e-12);
    };
    double total = 0.0;
    const int num_groups = static_cast<int>(prev.weights.size());
    const Eigen::Index d = prev.means.rows();
    for (int g = 0; g < num_groups; ++g) {
        total += rel(prev.weights(g), curr.weights(g));
        for (Eigen::Index r = 0; r < d; ++r) {
            total += rel(prev.means(r, g), curr.means(r, g));
        }
        const auto& pc = prev.covariances[static_cast<std::size_t>(g)];
        const auto& cc = curr.covariances[static_cast<std::size_t>(g)];
        // Symmetric entries counted once: diagonal plus strict upper triangle.
        for (Eigen::Index r = 0; r < d; ++r) {
            for (Eigen::Index c = r; c < d; ++c) {
                total += rel(pc(r, c), cc(r, c));
            }
        }
    }
    return total;
}

bool check_param_convergence(double relative_difference, int num_components,
                             int dimension, const ConvergenceConfig& cfg) {
    const long g = num_components;
    const long d = dimension;
    const long free_params = (g - 1) + g * d + g * d * (d + 1) / 2;
    return relative_difference / static_cast<double>(free_params) < cfg.eps_b;
}

DwResult durbin_watson(std::span<const double> series) {
    const std::size_t len = series.size();
    if (len < 3) {
        throw DataError("durbin_watson: need at least 3 points");
    }
    for (const double v : series) {
        if (!std::isfinite(v)) {
            throw DataError("durbin_watson: non-finite value in series");
        }
    }

    // Residuals of an ordinary least-squares line fit of value on index.
    const double n = static_cast<double>(len);
    double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        const double x = static_cast<double>(t);
        sum_x += x;
        sum_y += series[t];
        sum_xx += x * x;
        sum_xy += x * series[t];
    }
    const double denom = n * sum_xx - sum_x * sum_x;
    const double slope = (n * sum_xy - sum_x * sum_y) / denom;
    const double intercept = (sum_y - slope * sum_x) / n;

    double sq_sum = 0.0;
    double diff_sum = 0.0;
    double prev_resid = 0.0;
    double y_scale = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        const double resid = series[t] - (intercept + slope * static_cast<double>(t));
        sq_sum += resid * resid;
        if (t > 0) {
            const double diff = resid - prev_resid;
            diff_sum += diff * diff;
        }
        prev_resid = resid;
        y_scale = std::max(y_scale, std::abs(series[t]));
    }
    // Residual energy at double-rounding scale is indistinguishable from an
    // exactly constant-plus-trend series; the statistic would be computed on
    // arithmetic noise.
    const double floor_per_point = 1e-12 * std::max(1.0, y_scale);
    if (sq_sum <= n * floor_per_point * floor_per_point) {
        throw NumericalError("durbin_watson: residuals are identically zero");
    }

    DwResult result;
    result.statistic = diff_sum / sq_sum;
    // Normal approximation: DW ~ N(2, 4/T) under no autocorrelation.
    const double z = (result.statistic - 2.0) / std::sqrt(4.0 / n);
    result.p_value = std::erfc(std::abs(z) / std::numbers::sqrt2);
    return result;
}

std::optional<bool> check_dw_convergence(std::span<const double> series,
                                         const ConvergenceConfig& cfg) {
    if (series.size() < static_cast<std::size_t>(cfg.dw_window)) {
        return std::nullopt;
    }
    const auto window = series.subspan(series.size() - static_cast<std::size_t>(cfg.dw_window));
    try {
        return durbin_watson(window).p_value >= cfg.dw_alpha;
    } catch (const NumericalError&) {
        return true;  // a perfectly flat window has nothing left to converge
    }
}

}  // namespace specmix
