#include "specmix/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "specmix/errors.hpp"

namespace specmix {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

/// Cholesky-factor a covariance, escalating a relative ridge tenfold from
/// 1e-8*trace/d to 1e-2*trace/d before giving up.
Eigen::LLT<Eigen::MatrixXd> factor_covariance(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt;
    const auto d = cov.rows();
    const double scale = cov.trace() / static_cast<double>(d);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw NumericalError("covariance is not positive definite and has no usable scale");
    }
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    for (double lambda = 1e-8 * scale; lambda <= 1e-2 * scale * 1.0000001; lambda *= 10.0) {
        llt.compute(cov + lambda * identity);
        if (llt.info() == Eigen::Success) return llt;
    }
    throw NumericalError("covariance is not positive definite after regularization");
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void validate_model(const MixtureModel& model) {
    if (model.components.empty()) {
        throw DimensionError("mixture model has no components");
    }
    const int d = model.dimension();
    for (const auto& comp : model.components) {
        if (comp.mean.size() != d || comp.covariance.rows() != d || comp.covariance.cols() != d) {
            throw DimensionError("mixture component dimensions disagree");
        }
    }
}

}  // namespace

double log_density(const MixtureModel& model, const Eigen::VectorXd& x) {
    validate_model(model);
    const int d = model.dimension();
    if (x.size() != d) {
        throw DimensionError("point dimension does not match model");
    }
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd terms(model.num_components());
    for (int g = 0; g < model.num_components(); ++g) {
        const auto& comp = model.components[static_cast<std::size_t>(g)];
        const auto llt = factor_covariance(comp.covariance);
        const Eigen::VectorXd centered = x - comp.mean;
        const double quad = llt.matrixL().solve(centered).squaredNorm();
        terms(g) = std::log(comp.weight)
                 - 0.5 * (d * kLogTwoPi + log_det_from_llt(llt) + quad);
        best = std::max(best, terms(g));
    }
    if (!std::isfinite(best)) {
        throw NumericalError("mixture density underflowed to zero");
    }
    return best + std::log((terms.array() - best).exp().sum());
}

EStepResult e_step(const MixtureModel& model, const Eigen::MatrixXd& data) {
    validate_model(model);
    const Eigen::Index n = data.rows();
    const int d = model.dimension();
    const int num_groups = model.num_components();
    if (data.cols() != d) {
        throw DimensionError("data dimension does not match model");
    }
    if (n == 0) {
        throw DataError("e_step: empty data matrix");
    }

    // log(pi_g) + log N(x_i; mu_g, Sigma_g), one column per component.
    Eigen::MatrixXd log_terms(n, num_groups);
    for (int g = 0; g < num_groups; ++g) {
        const auto& comp = model.components[static_cast<std::size_t>(g)];
        const auto llt = factor_covariance(comp.covariance);
        const double log_norm =
            std::log(comp.weight) - 0.5 * (d * kLogTwoPi + log_det_from_llt(llt));
        const Eigen::MatrixXd centered = data.rowwise() - comp.mean.transpose();
        const Eigen::MatrixXd whitened = llt.matrixL().solve(centered.transpose());
        log_terms.col(g) = log_norm - 0.5 * whitened.colwise().squaredNorm().transpose().array();
    }

    EStepResult result;
    result.resp.matrix.resize(n, num_groups);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double row_max = log_terms.row(i).maxCoeff();
        if (!std::isfinite(row_max)) {
            throw NumericalError("posterior underflow: no component supports observation " +
                                 std::to_string(i));
        }
        const Eigen::ArrayXd shifted = (log_terms.row(i).array() - row_max).exp();
        const double denom = shifted.sum();
        result.resp.matrix.row(i) = (shifted / denom).matrix();
        total += row_max + std::log(denom);
    }
    if (!std::isfinite(total)) {
        throw NumericalError("log-likelihood is not finite");
    }
    result.log_likelihood = total;
    return result;
}

MixtureModel m_step(const Eigen::MatrixXd& data, const Responsibilities& resp) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (resp.matrix.rows() != n) {
        throw DimensionError("responsibility rows do not match data rows");
    }
    const int num_groups = static_cast<int>(resp.matrix.cols());
    if (num_groups < 1 || n == 0) {
        throw DataError("m_step: empty input");
    }

    MixtureModel model;
    model.components.resize(static_cast<std::size_t>(num_groups));
    const Eigen::VectorXd counts = resp.matrix.colwise().sum();
    const double floor = 1e-8 * static_cast<double>(n);
    for (int g = 0; g < num_groups; ++g) {
        if (counts(g) < floor) {
            throw EmptyComponentError(g, "component " + std::to_string(g) +
                                             " collapsed (effective size " +
                                             std::to_string(counts(g)) + ")");
        }
        auto& comp = model.components[static_cast<std::size_t>(g)];
        comp.weight = counts(g) / static_cast<double>(n);
        comp.mean = data.transpose() * resp.matrix.col(g) / counts(g);
        const Eigen::MatrixXd centered = data.rowwise() - comp.mean.transpose();
        Eigen::MatrixXd cov =
            centered.transpose() * resp.matrix.col(g).asDiagonal() * centered / counts(g);
        cov = ((cov + cov.transpose()) / 2.0).eval();  // restore exact symmetry
        // Base ridge keeping bootstrap resamples with thin groups factorable.
        const double lambda = 1e-8 * cov.trace() / static_cast<double>(d);
        cov.diagonal().array() += lambda;
        comp.covariance = std::move(cov);
    }
    return model;
}

EmFit fit_em(const Eigen::MatrixXd& data, int num_components,
             const Responsibilities& init_resp, double eps, int max_iter) {
    if (num_components < 1) {
        throw DimensionError("num_components must be at least 1");
    }
    if (init_resp.matrix.cols() != num_components) {
        throw DimensionError("initial responsibilities do not match num_components");
    }

    EmFit fit;
    fit.resp = init_resp;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < max_iter; ++k) {
        fit.model = m_step(data, fit.resp);
        EStepResult e = e_step(fit.model, data);
        fit.resp = std::move(e.resp);
        fit.trace.log_likelihoods.push_back(e.log_likelihood);
        fit.trace.iterations = k + 1;
        if (k > 0 && std::abs(e.log_likelihood - prev) < eps) {
            fit.trace.converged = true;
            break;
        }
        prev = e.log_likelihood;
    }
    return fit;
}

EmFit fit_em(const Eigen::MatrixXd& data, int num_components, InitStrategy init,
             RandomStream& rng, double eps, int max_iter) {
    const Eigen::Index n = data.rows();
    std::vector<int> labels(static_cast<std::size_t>(n));
    if (init == InitStrategy::KMeans) {
        labels = kmeans_labels(data, num_components, rng);
    } else {
        for (auto& l : labels) l = static_cast<int>(rng.uniform_index(
            static_cast<std::size_t>(num_components)));
    }
    return fit_em(data, num_components, one_hot(labels, num_components), eps, max_iter);
}

std::vector<int> kmeans_labels(const Eigen::MatrixXd& data, int num_clusters,
                               RandomStream& rng, int max_rounds) {
    const Eigen::Index n = data.rows();
    if (num_clusters < 1) {
        throw DimensionError("num_clusters must be at least 1");
    }
    if (n < num_clusters) {
        throw DataError("fewer observations than clusters");
    }

    // k-means++ seeding: sample each new centre with probability proportional
    // to squared distance from the nearest chosen centre.
    Eigen::MatrixXd centers(num_clusters, data.cols());
    centers.row(0) = data.row(static_cast<Eigen::Index>(
        rng.uniform_index(static_cast<std::size_t>(n))));
    Eigen::VectorXd dist2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < num_clusters; ++c) {
        const double total = dist2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= dist2(i);
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
                pick = i;  // fall back to the last row under rounding
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        }
        centers.row(c) = data.row(pick);
        dist2 = dist2.cwiseMin(
            (data.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (data.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < num_clusters; ++c) {
                const double d = (data.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && round > 0) break;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(num_clusters, data.cols());
        Eigen::VectorXd sizes = Eigen::VectorXd::Zero(num_clusters);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += data.row(i);
            sizes(labels[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (int c = 0; c < num_clusters; ++c) {
            if (sizes(c) > 0.0) {
                centers.row(c) = sums.row(c) / sizes(c);
            } else {
                // Re-seed an empty cluster at the point farthest from its centre.
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double d =
                        (data.row(i) - centers.row(labels[static_cast<std::size_t>(i)]))
                            .squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers.row(c) = data.row(far);
            }
        }
    }
    return labels;
}

Responsibilities one_hot(const std::vector<int>& labels, int num_components) {
    Responsibilities resp;
    resp.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                        num_components);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_components) {
            throw DataError("label " + std::to_string(labels[i]) + " out of range");
        }
        resp.matrix(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return resp;
}

std::vector<int> harden(const Responsibilities& resp) {
    std::vector<int> labels(static_cast<std::size_t>(resp.matrix.rows()));
    for (Eigen::Index i = 0; i < resp.matrix.rows(); ++i) {
        int best = 0;
        for (Eigen::Index g = 1; g < resp.matrix.cols(); ++g) {
            if (resp.matrix(i, g) > resp.matrix(i, best)) {
                best = static_cast<int>(g);  // strict >: ties keep the lowest index
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

long count_free_parameters(int num_components, int dimension) {
    if (num_components < 1 || dimension < 1) {
        throw DimensionError("count_free_parameters: G and p must be positive");
    }
    const long g = num_components;
    const long p = dimension;
    return (g - 1) + g * p + g * p * (p + 1) / 2;
}

long count_free_parameters_factor_analyzer(int num_components, int dimension,
                                           int num_factors) {
    if (num_components < 1 || dimension < 1) {
        throw DimensionError("count_free_parameters: G and p must be positive");
    }
    if (num_factors < 1 || num_factors >= dimension) {
        throw DimensionError("count_free_parameters: q must satisfy 1 <= q < p");
    }
    const long g = num_components;
    const long p = dimension;
    const long q = num_factors;
    return g * (p * q - q * (q - 1) / 2) + g * p;
}

double bic(double log_likelihood, long free_parameters, int num_points) {
    if (num_points < 1) {
        throw DataError("bic: n must be at least 1");
    }
    return 2.0 * log_likelihood -
           static_cast<double>(free_parameters) * std::log(static_cast<double>(num_points));
}

}  // namespace specmix
