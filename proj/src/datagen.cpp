#include "specmix/datagen.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "specmix/errors.hpp"

namespace specmix {

namespace {

Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                       RandomStream& rng) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            out(i, j) = rng.normal();
        }
    }
    return out;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("sampling covariance is not positive definite");
    }
    return llt.matrixL();
}

}  // namespace

LabeledDataset generate_mirror(int n_per_group, int p, std::uint64_t seed) {
    if (n_per_group < 1 || p < 1) {
        throw DataError("generate_mirror: n_per_group and p must be positive");
    }
    RandomStream rng(seed);
    const int n = 2 * n_per_group + 1;

    LabeledDataset out;
    out.data.resize(n, p);
    out.labels.resize(static_cast<std::size_t>(n));

    const Eigen::RowVectorXd centre = Eigen::RowVectorXd::Constant(p, 7.0);
    for (int i = 0; i < n_per_group; ++i) {
        out.data.row(i) = centre + standard_normal_matrix(1, p, rng);
        out.labels[static_cast<std::size_t>(i)] = 0;
        // Group 2 is the exact mirror image of group 1, not an independent draw.
        out.data.row(n_per_group + i) = -out.data.row(i);
        out.labels[static_cast<std::size_t>(n_per_group + i)] = 1;
    }
    out.data.row(n - 1).setZero();  // probe equidistant from both populations
    out.labels[static_cast<std::size_t>(n - 1)] = 0;
    out.special_indices.push_back(n - 1);
    return out;
}

LabeledDataset generate_cross_over(int n_per_group, int T, int n_changers,
                                   std::uint64_t seed) {
    if (n_per_group < 1 || T < 2 || n_changers < 0) {
        throw DataError("generate_cross_over: invalid shape parameters");
    }
    RandomStream rng(seed);
    const int n = 2 * n_per_group + n_changers;

    Eigen::VectorXd mean_up(T);
    Eigen::VectorXd mean_down(T);
    for (int t = 0; t < T; ++t) {
        mean_up(t) = -20.0 + t;   // climbs one unit per time point
        mean_down(t) = 20.0 - t;  // the reverse path
    }
    // Changers track the rising group until the paths meet, then the falling one.
    const int cross = T / 2;
    Eigen::VectorXd mean_change(T);
    for (int t = 0; t < T; ++t) {
        mean_change(t) = t < cross ? mean_up(t) : mean_down(t);
    }

    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(T, T, 0.9);
    cov.diagonal().setOnes();
    const Eigen::MatrixXd chol = cholesky_lower(cov);

    LabeledDataset out;
    out.data.resize(n, T);
    out.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n_per_group; ++i) {
        out.data.row(i) =
            (mean_up + chol * standard_normal_matrix(T, 1, rng)).transpose();
        out.labels[static_cast<std::size_t>(i)] = 0;
    }
    for (int i = 0; i < n_per_group; ++i) {
        out.data.row(n_per_group + i) =
            (mean_down + chol * standard_normal_matrix(T, 1, rng)).transpose();
        out.labels[static_cast<std::size_t>(n_per_group + i)] = 1;
    }
    for (int i = 0; i < n_changers; ++i) {
        const int row = 2 * n_per_group + i;
        out.data.row(row) =
            (mean_change + chol * standard_normal_matrix(T, 1, rng)).transpose();
        out.labels[static_cast<std::size_t>(row)] = 0;  // the group they start in
        out.special_indices.push_back(row);
    }
    return out;
}

LabeledDataset generate_gmm(const MixtureModel& model, int n, std::uint64_t seed) {
    if (n < 1) {
        throw DataError("generate_gmm: n must be positive");
    }
    if (model.components.empty()) {
        throw DimensionError("generate_gmm: model has no components");
    }
    RandomStream rng(seed);
    const int d = model.dimension();
    const int num_groups = model.num_components();

    std::vector<Eigen::MatrixXd> chols;
    chols.reserve(static_cast<std::size_t>(num_groups));
    for (const auto& comp : model.components) {
        chols.push_back(cholesky_lower(comp.covariance));
    }

    LabeledDataset out;
    out.data.resize(n, d);
    out.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int g = num_groups - 1;
        double cum = 0.0;
        for (int c = 0; c < num_groups; ++c) {
            cum += model.components[static_cast<std::size_t>(c)].weight;
            if (u < cum) {
                g = c;
                break;
            }
        }
        const auto& comp = model.components[static_cast<std::size_t>(g)];
        out.data.row(i) =
            (comp.mean + chols[static_cast<std::size_t>(g)] *
                             standard_normal_matrix(d, 1, rng))
                .transpose();
        out.labels[static_cast<std::size_t>(i)] = g;
    }
    return out;
}

}  // namespace specmix
