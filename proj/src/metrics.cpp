#include "specmix/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "specmix/errors.hpp"

namespace specmix {

namespace {

int label_span(const std::vector<int>& labels) {
    int max_label = -1;
    for (const int l : labels) {
        if (l < 0) {
            throw DataError("labels must be nonnegative");
        }
        max_label = std::max(max_label, l);
    }
    return max_label + 1;
}

double choose2(double m) { return m * (m - 1.0) / 2.0; }

/// Assignment minimizing total cost over a square matrix (Hungarian method
/// with potentials, O(k^3)). Returns, for each column, its assigned row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int k = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(k) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(k) + 1, 0);
    for (int i = 1; i <= k; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> min_v(static_cast<std::size_t>(k) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(k) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= k; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < min_v[static_cast<std::size_t>(j)]) {
                    min_v[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (min_v[static_cast<std::size_t>(j)] < delta) {
                    delta = min_v[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= k; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_v[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_for_col(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        row_for_col[static_cast<std::size_t>(j - 1)] = match[static_cast<std::size_t>(j)] - 1;
    }
    return row_for_col;
}

}  // namespace

ContingencyTable contingency_table(const std::vector<int>& true_labels,
                                   const std::vector<int>& est_labels) {
    if (true_labels.size() != est_labels.size()) {
        throw DimensionError("label vectors have different lengths");
    }
    if (true_labels.empty()) {
        throw DataError("label vectors are empty");
    }
    ContingencyTable table;
    table.counts = Eigen::MatrixXi::Zero(label_span(true_labels), label_span(est_labels));
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        ++table.counts(true_labels[i], est_labels[i]);
    }
    return table;
}

double classification_rate(const std::vector<int>& true_labels,
                           const std::vector<int>& est_labels) {
    const ContingencyTable table = contingency_table(true_labels, est_labels);
    // Square the table so a permutation of estimated labels is well-defined
    // even when the two labelings use different numbers of clusters.
    const int k = static_cast<int>(
        std::max(table.counts.rows(), table.counts.cols()));
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    counts.topLeftCorner(table.counts.rows(), table.counts.cols()) =
        table.counts.cast<double>();

    double best = 0.0;
    if (k <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double agree = 0.0;
            for (int e = 0; e < k; ++e) {
                agree += counts(perm[static_cast<std::size_t>(e)], e);
            }
            best = std::max(best, agree);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        const std::vector<int> row_for_col = min_cost_assignment(-counts);
        for (int e = 0; e < k; ++e) {
            best += counts(row_for_col[static_cast<std::size_t>(e)], e);
        }
    }
    return best / static_cast<double>(true_labels.size());
}

double adjusted_rand_index(const std::vector<int>& true_labels,
                           const std::vector<int>& est_labels) {
    if (true_labels.size() < 2) {
        throw DataError("adjusted_rand_index: need at least 2 observations");
    }
    const ContingencyTable table = contingency_table(true_labels, est_labels);
    const Eigen::MatrixXd counts = table.counts.cast<double>();

    double sum_cells = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            sum_cells += choose2(counts(i, j));
        }
    }
    double sum_rows = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        sum_rows += choose2(counts.row(i).sum());
    }
    double sum_cols = 0.0;
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
        sum_cols += choose2(counts.col(j).sum());
    }
    const double total_pairs = choose2(static_cast<double>(true_labels.size()));
    const double expected = sum_rows * sum_cols / total_pairs;
    const double maximum = (sum_rows + sum_cols) / 2.0;
    if (maximum == expected) {
        // Both partitions put everything in one cluster: perfect agreement.
        return 1.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

}  // namespace specmix
