#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "specmix/errors.hpp"
#include "specmix/metrics.hpp"
#include "specmix/rng.hpp"

using namespace specmix;

TEST_CASE("adjusted rand index matches the pair-counting oracle") {
    RandomStream rng(701);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_index(56));
        const int ka = 1 + static_cast<int>(rng.uniform_index(6));
        const int kb = 1 + static_cast<int>(rng.uniform_index(6));
        const std::vector<int> a = oracle::random_labels(n, ka, rng);
        const std::vector<int> b = oracle::random_labels(n, kb, rng);
        const double got = adjusted_rand_index(a, b);
        const double want = oracle::adjusted_rand_index(a, b);
        CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
        CHECK(got <= 1.0 + 1e-12);
    }
}

TEST_CASE("classification rate matches exhaustive relabeling") {
    RandomStream rng(702);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 6 + static_cast<int>(rng.uniform_index(50));
        const int k = 1 + static_cast<int>(rng.uniform_index(5));
        const std::vector<int> truth = oracle::random_labels(n, k, rng);
        const std::vector<int> est = oracle::random_labels(n, k, rng);
        const double got = classification_rate(truth, est);
        const double want = oracle::classification_rate(truth, est, k);
        CHECK(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("the assignment path beyond eight clusters matches exhaustive search") {
    RandomStream rng(703);
    // Nine clusters exceeds the exhaustive-permutation cutoff inside the
    // library, so this pits the optimal-assignment path against brute force.
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 80;
        const std::vector<int> truth = oracle::random_labels(n, 9, rng);
        const std::vector<int> est = oracle::random_labels(n, 9, rng);
        const double got = classification_rate(truth, est);
        const double want = oracle::classification_rate(truth, est, 9);
        CHECK(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("perfect and relabeled agreement score one") {
    RandomStream rng(704);
    const std::vector<int> truth = oracle::random_labels(40, 3, rng);
    CHECK(classification_rate(truth, truth) == 1.0);
    CHECK(adjusted_rand_index(truth, truth) == 1.0);

    // A pure relabeling changes nothing.
    std::vector<int> relabeled(truth.size());
    const int perm[3] = {2, 0, 1};
    std::transform(truth.begin(), truth.end(), relabeled.begin(),
                   [&perm](int l) { return perm[l]; });
    CHECK(classification_rate(truth, relabeled) == 1.0);
    CHECK(std::abs(adjusted_rand_index(truth, relabeled) - 1.0) <= 1e-12);
}

TEST_CASE("degenerate and adversarial labelings") {
    // Both partitions trivial: defined as perfect agreement.
    const std::vector<int> ones(10, 0);
    CHECK(adjusted_rand_index(ones, ones) == 1.0);
    CHECK(classification_rate(ones, ones) == 1.0);

    // Constant estimate against a balanced truth: best relabeling matches
    // the larger class share.
    std::vector<int> truth(30);
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 3);
    const std::vector<int> constant(30, 1);
    CHECK(std::abs(classification_rate(truth, constant) - 1.0 / 3.0) <= 1e-12);

    // Independent labelings hover near zero adjusted agreement.
    RandomStream rng(705);
    const std::vector<int> a = oracle::random_labels(4000, 2, rng);
    const std::vector<int> b = oracle::random_labels(4000, 2, rng);
    CHECK(std::abs(adjusted_rand_index(a, b)) < 0.05);
}

TEST_CASE("differing cluster counts are handled by padding") {
    // Truth uses three clusters, the estimate collapses two of them.
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    const std::vector<int> est{0, 0, 1, 1, 1, 1};
    // Best relabeling recovers four of six points.
    CHECK(std::abs(classification_rate(truth, est) - 4.0 / 6.0) <= 1e-12);
    CHECK(std::abs(adjusted_rand_index(truth, est) -
                   oracle::adjusted_rand_index(truth, est)) <= 1e-12);

    const ContingencyTable table = contingency_table(truth, est);
    CHECK(table.counts.rows() == 3);
    CHECK(table.counts.cols() == 2);
    CHECK(table.counts.sum() == 6);
}

TEST_CASE("input validation") {
    const std::vector<int> a{0, 1, 0};
    const std::vector<int> b{0, 1};
    CHECK_THROWS_AS(classification_rate(a, b), DimensionError);
    CHECK_THROWS_AS(adjusted_rand_index(a, b), DimensionError);
    CHECK_THROWS_AS(contingency_table({0, -1}, {0, 1}), DataError);
    CHECK_THROWS_AS(adjusted_rand_index({}, {}), DataError);
}
