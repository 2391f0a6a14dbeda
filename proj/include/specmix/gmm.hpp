#pragma once

#include <vector>

#include <Eigen/Dense>

#include "specmix/rng.hpp"

namespace specmix {

/// One Gaussian component of a finite mixture.
struct MixtureComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// A finite mixture of multivariate Gaussians.
struct MixtureModel {
    std::vector<MixtureComponent> components;

    int num_components() const { return static_cast<int>(components.size()); }
    int dimension() const {
        return components.empty() ? 0 : static_cast<int>(components.front().mean.size());
    }
};

/// Posterior membership probabilities: n x G, rows sum to one.
struct Responsibilities {
    Eigen::MatrixXd matrix;
};

/// Log mixture density log f(x) evaluated via a log-sum-exp over components.
/// Covariances are factored with a Cholesky; a small ridge proportional to the
/// average variance is added, escalating tenfold on failure, before giving up
/// with NumericalError.
double log_density(const MixtureModel& model, const Eigen::VectorXd& x);

struct EStepResult {
    Responsibilities resp;
    double log_likelihood = 0.0;
};

/// Expectation step: posterior memberships and total log-likelihood of `data`
/// (n x p) under `model`.
EStepResult e_step(const MixtureModel& model, const Eigen::MatrixXd& data);

/// Maximization step: weighted ML estimates of weights, means, and full
/// covariances from soft memberships. A component whose effective size n_g
/// falls below 1e-8 * n raises EmptyComponentError.
MixtureModel m_step(const Eigen::MatrixXd& data, const Responsibilities& resp);

/// Per-iteration log-likelihood record of an EM run.
struct EmTrace {
    std::vector<double> log_likelihoods;
    int iterations = 0;
    bool converged = false;
};

struct EmFit {
    MixtureModel model;
    Responsibilities resp;
    EmTrace trace;
};

/// Run EM from explicit starting memberships until the lack-of-progress
/// criterion |ll_k - ll_{k-1}| < eps holds or max_iter is reached.
EmFit fit_em(const Eigen::MatrixXd& data, int num_components,
             const Responsibilities& init_resp, double eps, int max_iter);

/// Initialization strategies for fit_em's convenience overload.
enum class InitStrategy { KMeans, Random };

EmFit fit_em(const Eigen::MatrixXd& data, int num_components, InitStrategy init,
             RandomStream& rng, double eps, int max_iter);

/// Lloyd's k-means labels (k-means++ style seeding from `rng`), capped at
/// `max_rounds` update rounds.
std::vector<int> kmeans_labels(const Eigen::MatrixXd& data, int num_clusters,
                               RandomStream& rng, int max_rounds = 50);

/// Hard labels -> one-hot membership matrix.
Responsibilities one_hot(const std::vector<int>& labels, int num_components);

/// Soft memberships -> arg-max labels.
std::vector<int> harden(const Responsibilities& resp);

/// Free parameters of a G-component full-covariance Gaussian mixture in p
/// dimensions: (G - 1) + G p + G p (p + 1) / 2.
long count_free_parameters(int num_components, int dimension);

/// Parameter count under a q-factor analyzer covariance structure,
/// G (p q - q (q - 1) / 2) + G p. Reported for model comparison only; this
/// library does not fit factor-analyzer mixtures.
long count_free_parameters_factor_analyzer(int num_components, int dimension,
                                           int num_factors);

/// Bayesian information criterion 2 ll - rho log n (larger is better).
double bic(double log_likelihood, long free_parameters, int num_points);

}  // namespace specmix
