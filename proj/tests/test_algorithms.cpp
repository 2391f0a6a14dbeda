#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "specmix/algorithms.hpp"
#include "specmix/datagen.hpp"
#include "specmix/errors.hpp"
#include "specmix/metrics.hpp"
#include "specmix/spectral.hpp"

using namespace specmix;

namespace {

/// Small antipodal two-group problem every algorithm can solve quickly.
Eigen::MatrixXd small_mirror() {
    static const LabeledDataset ds = generate_mirror(150, 8, 3);
    return ds.data;
}

std::vector<int> small_mirror_truth() {
    return generate_mirror(150, 8, 3).labels;
}

RunConfig fast_bootstrap_config() {
    RunConfig cfg;
    cfg.num_components = 2;
    cfg.seed = 7;
    cfg.min_bootstrap = 20;
    cfg.dw_window = 20;
    cfg.max_bootstrap = 60;
    return cfg;
}

bool identical(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           ((a - b).cwiseAbs().maxCoeff() == 0.0 ||
            (a.size() == 0 && b.size() == 0));
}

}  // namespace

TEST_CASE("algorithm names round-trip") {
    for (Algorithm a : {Algorithm::Em, Algorithm::SpectralEm, Algorithm::BootEm,
                        Algorithm::SpectralBootEm, Algorithm::BootSpectral}) {
        CHECK(algorithm_from_name(algorithm_name(a)) == a);
    }
    CHECK_THROWS_AS(algorithm_from_name("definitely-not-an-algorithm"), Error);
}

TEST_CASE("every algorithm separates the antipodal groups") {
    const Eigen::MatrixXd data = small_mirror();
    const std::vector<int> truth = small_mirror_truth();
    const RunConfig cfg = fast_bootstrap_config();

    for (Algorithm a : {Algorithm::Em, Algorithm::SpectralEm, Algorithm::BootEm,
                        Algorithm::SpectralBootEm, Algorithm::BootSpectral}) {
        const FitResult fit = run_algorithm(a, data, cfg);
        // The probe point (last row) may fall either way; the groups must not.
        std::vector<int> got = fit.hard_labels();
        std::vector<int> want = truth;
        got.pop_back();
        want.pop_back();
        CHECK(classification_rate(want, got) >= 0.99);
        CHECK(fit.elapsed_seconds >= 0.0);
        CHECK(std::isfinite(fit.log_likelihood));
    }
}

TEST_CASE("seeded runs repeat bit for bit") {
    const Eigen::MatrixXd data = small_mirror();
    const RunConfig cfg = fast_bootstrap_config();

    for (Algorithm a : {Algorithm::Em, Algorithm::SpectralEm, Algorithm::BootEm,
                        Algorithm::SpectralBootEm, Algorithm::BootSpectral}) {
        const FitResult first = run_algorithm(a, data, cfg);
        const FitResult second = run_algorithm(a, data, cfg);

        CHECK(identical(first.memberships, second.memberships));
        CHECK(first.log_likelihood == second.log_likelihood);
        CHECK(first.bootstrap_iterations == second.bootstrap_iterations);
        CHECK(first.hard_labels() == second.hard_labels());
        REQUIRE(first.trace.size() == second.trace.size());
        for (std::size_t k = 0; k < first.trace.size(); ++k) {
            CHECK(first.trace[k].log_likelihood == second.trace[k].log_likelihood);
            CHECK(first.trace[k].criterion == second.trace[k].criterion);
        }
        CHECK(first.oob_memberships.has_value() == second.oob_memberships.has_value());
        if (first.oob_memberships) {
            // NaN rows (never out-of-bag) compare through their masks.
            CHECK(first.never_oob == second.never_oob);
            const Eigen::MatrixXd& fa = *first.oob_memberships;
            const Eigen::MatrixXd& sa = *second.oob_memberships;
            REQUIRE(fa.rows() == sa.rows());
            for (Eigen::Index i = 0; i < fa.rows(); ++i) {
                for (Eigen::Index g = 0; g < fa.cols(); ++g) {
                    const bool nan_a = std::isnan(fa(i, g));
                    const bool nan_b = std::isnan(sa(i, g));
                    CHECK(nan_a == nan_b);
                    if (!nan_a) CHECK(fa(i, g) == sa(i, g));
                }
            }
        }
    }
}

TEST_CASE("estimation space and dimension are reported per algorithm") {
    const Eigen::MatrixXd data = small_mirror();
    const RunConfig cfg = fast_bootstrap_config();
    const int p = static_cast<int>(data.cols());

    CHECK(run_em(data, cfg).space == EstimationSpace::Original);
    CHECK(run_em(data, cfg).estimation_dim == p);
    CHECK(run_boot_em(data, cfg).space == EstimationSpace::Original);
    CHECK(run_boot_em(data, cfg).estimation_dim == p);

    for (const FitResult& fit : {run_spectral_em(data, cfg), run_spectral_boot_em(data, cfg),
                                 run_boot_spectral(data, cfg)}) {
        CHECK(fit.space == EstimationSpace::Spectral);
        CHECK(fit.estimation_dim == cfg.num_components);
        CHECK(fit.model.dimension() == cfg.num_components);
    }
}

TEST_CASE("decomposition counts separate the spectral variants") {
    const Eigen::MatrixXd data = small_mirror();
    const RunConfig cfg = fast_bootstrap_config();

    CHECK(run_em(data, cfg).svd_count == 0);
    CHECK(run_boot_em(data, cfg).svd_count == 0);
    CHECK(run_spectral_em(data, cfg).svd_count == 1);
    CHECK(run_spectral_boot_em(data, cfg).svd_count == 1);

    // One embedding per resample plus the initial reporting basis.
    const FitResult bs = run_boot_spectral(data, cfg);
    REQUIRE(bs.bootstrap_iterations.has_value());
    CHECK(bs.svd_count == *bs.bootstrap_iterations + 1);
}

TEST_CASE("bootstrap floors resolve per algorithm when unset") {
    const Eigen::MatrixXd data = small_mirror();
    RunConfig cfg;
    cfg.num_components = 2;
    cfg.seed = 5;
    cfg.max_bootstrap = 700;  // above every default floor

    const FitResult bem = run_boot_em(data, cfg);
    REQUIRE(bem.bootstrap_iterations.has_value());
    CHECK(*bem.bootstrap_iterations >= 500);

    const FitResult sbe = run_spectral_boot_em(data, cfg);
    REQUIRE(sbe.bootstrap_iterations.has_value());
    CHECK(*sbe.bootstrap_iterations >= 300);

    const FitResult bs = run_boot_spectral(data, cfg);
    REQUIRE(bs.bootstrap_iterations.has_value());
    CHECK(*bs.bootstrap_iterations >= 300);

    // An explicit floor (with a window to match) is honored instead.
    RunConfig low = cfg;
    low.min_bootstrap = 25;
    low.dw_window = 25;
    const FitResult early = run_boot_em(data, low);
    REQUIRE(early.bootstrap_iterations.has_value());
    CHECK(*early.bootstrap_iterations >= 25);
    CHECK(*early.bootstrap_iterations < 500);
}

TEST_CASE("bootstrap results carry normalized memberships and OOB bookkeeping") {
    const Eigen::MatrixXd data = small_mirror();
    const RunConfig cfg = fast_bootstrap_config();
    const int n = static_cast<int>(data.rows());

    for (Algorithm a : {Algorithm::BootEm, Algorithm::SpectralBootEm, Algorithm::BootSpectral}) {
        const FitResult fit = run_algorithm(a, data, cfg);

        REQUIRE(fit.bootstrap_iterations.has_value());
        CHECK(*fit.bootstrap_iterations >= 20);
        REQUIRE(fit.memberships.rows() == n);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(fit.memberships.row(i).sum() - 1.0) <= 1e-9);
            CHECK(fit.memberships.row(i).minCoeff() >= 0.0);
        }

        REQUIRE(fit.oob_memberships.has_value());
        REQUIRE(fit.oob_memberships->rows() == n);
        for (int i = 0; i < n; ++i) {
            const bool flagged =
                std::find(fit.never_oob.begin(), fit.never_oob.end(), i) != fit.never_oob.end();
            const bool is_nan = std::isnan((*fit.oob_memberships)(i, 0));
            CHECK(flagged == is_nan);
            if (!is_nan) {
                CHECK(std::abs(fit.oob_memberships->row(i).sum() - 1.0) <= 1e-9);
            }
        }

        REQUIRE(fit.std_errors.has_value());
        CHECK(fit.std_errors->weights.minCoeff() >= 0.0);
        CHECK(static_cast<int>(fit.trace.size()) == *fit.bootstrap_iterations);
    }

    // Non-bootstrap runs carry neither OOB memberships nor standard errors.
    const FitResult em = run_em(data, cfg);
    CHECK(!em.oob_memberships.has_value());
    CHECK(!em.std_errors.has_value());
    CHECK(!em.bootstrap_iterations.has_value());
}

TEST_CASE("plain EM trace mirrors its log-likelihood history") {
    const Eigen::MatrixXd data = small_mirror();
    RunConfig cfg;
    cfg.num_components = 2;
    cfg.seed = 9;
    const FitResult fit = run_em(data, cfg);
    REQUIRE(!fit.trace.empty());
    CHECK(fit.trace.back().converged);
    CHECK(fit.trace.back().log_likelihood == fit.log_likelihood);
    for (std::size_t k = 1; k < fit.trace.size(); ++k) {
        CHECK(fit.trace[k].iteration == fit.trace[k - 1].iteration + 1);
        CHECK(fit.trace[k].log_likelihood >=
              fit.trace[k - 1].log_likelihood -
                  1e-8 * std::max(1.0, std::abs(fit.trace[k - 1].log_likelihood)));
    }
}

TEST_CASE("random initialization is available and seeded") {
    const Eigen::MatrixXd data = small_mirror();
    RunConfig cfg;
    cfg.num_components = 2;
    cfg.seed = 31;
    cfg.init = InitStrategy::Random;
    const FitResult a = run_em(data, cfg);
    const FitResult b = run_em(data, cfg);
    CHECK(identical(a.memberships, b.memberships));
    CHECK(std::isfinite(a.log_likelihood));
}
