#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "specmix/errors.hpp"
#include "specmix/rng.hpp"
#include "specmix/spectral.hpp"

using namespace specmix;

namespace {

/// Apply the library's sign convention to a basis column: largest-magnitude
/// entry positive, ties broken toward the lowest row index.
Eigen::VectorXd canonical_sign(const Eigen::VectorXd& v) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    }
    return v[pivot] < 0.0 ? Eigen::VectorXd(-v) : v;
}

}  // namespace

TEST_CASE("embedding agrees with a full-decomposition oracle") {
    RandomStream rng(401);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_index(10));
        const int p = 1 + static_cast<int>(rng.uniform_index(10));
        const int max_g = std::min(n, p);
        const int G = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_g)));
        const Eigen::MatrixXd data = oracle::random_data(n, p, rng);

        const SpectralEmbedding emb = spectral_transform(data, G);
        Eigen::JacobiSVD<Eigen::MatrixXd> full(data, Eigen::ComputeFullU | Eigen::ComputeFullV);

        REQUIRE(emb.basis.rows() == p);
        REQUIRE(emb.basis.cols() == G);
        REQUIRE(emb.embedded.rows() == n);
        REQUIRE(emb.embedded.cols() == G);

        // Leading singular values, descending.
        for (int g = 0; g < G; ++g) {
            CHECK(std::abs(emb.singular_values[g] - full.singularValues()[g]) <=
                  1e-8 * std::max(1.0, full.singularValues()[g]));
            if (g > 0) CHECK(emb.singular_values[g] <= emb.singular_values[g - 1] + 1e-12);
        }

        // The projection is exactly data * basis.
        CHECK((emb.embedded - data * emb.basis).cwiseAbs().maxCoeff() <= 1e-10);

        // Rank-G reconstruction error equals the tail singular value energy,
        // i.e. the projection is optimal.
        const double err = (data - emb.embedded * emb.basis.transpose()).squaredNorm();
        double tail = 0.0;
        for (Eigen::Index g = G; g < full.singularValues().size(); ++g) {
            tail += full.singularValues()[g] * full.singularValues()[g];
        }
        CHECK(std::abs(err - tail) <= 1e-8 * std::max(1.0, data.squaredNorm()));

        // Basis columns match the oracle's right-singular vectors up to the
        // documented sign rule, provided the singular value is isolated.
        for (int g = 0; g < G; ++g) {
            const double sv = full.singularValues()[g];
            const bool isolated =
                (g == 0 || full.singularValues()[g - 1] - sv > 1e-6) &&
                (g + 1 >= full.singularValues().size() || sv - full.singularValues()[g + 1] > 1e-6);
            if (!isolated) continue;
            const Eigen::VectorXd want = canonical_sign(full.matrixV().col(g));
            const Eigen::VectorXd got = canonical_sign(emb.basis.col(g));
            CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-7);
        }
    }
}

TEST_CASE("basis is orthonormal and signs follow the convention") {
    RandomStream rng(402);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_index(20));
        const int p = 2 + static_cast<int>(rng.uniform_index(8));
        const int G = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(std::min(n, p))));
        const SpectralEmbedding emb = spectral_transform(oracle::random_data(n, p, rng), G);
        const Eigen::MatrixXd gram = emb.basis.transpose() * emb.basis;
        CHECK((gram - Eigen::MatrixXd::Identity(G, G)).cwiseAbs().maxCoeff() <= 1e-10);
        for (int g = 0; g < G; ++g) {
            Eigen::Index pivot = 0;
            emb.basis.col(g).cwiseAbs().maxCoeff(&pivot);
            CHECK(emb.basis(pivot, g) > 0.0);
        }
    }
}

TEST_CASE("the reduced paths agree with the dense decomposition") {
    RandomStream rng(403);
    // Tall case exercises the p x p product, wide case the n x n one; a tiny
    // threshold forces the reduced path, the default keeps the dense one.
    for (const auto [n, p] : {std::pair{40, 12}, std::pair{12, 40}}) {
        const Eigen::MatrixXd data = oracle::random_data(n, p, rng);
        const int G = 3;
        const SpectralEmbedding dense = spectral_transform(data, G);
        const SpectralEmbedding reduced = spectral_transform(data, G, /*full_svd_threshold=*/4);
        CHECK((dense.singular_values - reduced.singular_values).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((dense.basis - reduced.basis).cwiseAbs().maxCoeff() <= 1e-7);
        CHECK((dense.embedded - reduced.embedded).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("rank-deficient data still yields an orthonormal basis") {
    RandomStream rng(404);
    Eigen::MatrixXd data(8, 5);
    const Eigen::VectorXd row = Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return rng.normal(); });
    for (int i = 0; i < 8; ++i) data.row(i) = row * static_cast<double>(i + 1);  // rank one

    const SpectralEmbedding emb = spectral_transform(data, 3);
    const Eigen::MatrixXd gram = emb.basis.transpose() * emb.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(emb.singular_values[0] > 0.0);
    // Trailing singular values of a rank-one matrix vanish.
    CHECK(emb.singular_values[1] <= 1e-8 * emb.singular_values[0]);
    CHECK((emb.embedded - data * emb.basis).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("invocation counter increments once per transform") {
    RandomStream rng(405);
    const Eigen::MatrixXd data = oracle::random_data(10, 4, rng);
    const long before = svd_invocations();
    spectral_transform(data, 2);
    spectral_transform(data, 1);
    CHECK(svd_invocations() == before + 2);
}

TEST_CASE("input validation") {
    RandomStream rng(406);
    const Eigen::MatrixXd data = oracle::random_data(6, 4, rng);
    CHECK_THROWS_AS(spectral_transform(data, 0), DimensionError);
    CHECK_THROWS_AS(spectral_transform(data, 5), DimensionError);

    Eigen::MatrixXd bad = data;
    bad(2, 1) = std::nan("");
    CHECK_THROWS_AS(spectral_transform(bad, 2), DataError);

    CHECK_THROWS_AS(spectral_transform(Eigen::MatrixXd(), 1), DataError);
}
