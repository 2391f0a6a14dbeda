// specmix command-line tool: simulate datasets, fit mixture models with the
// five estimators, and benchmark them against each other.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "specmix/algorithms.hpp"
#include "specmix/datagen.hpp"
#include "specmix/errors.hpp"
#include "specmix/io.hpp"

namespace {

using nlohmann::json;
using namespace specmix;

// Exit codes: 0 success, 2 input/configuration problems, 3 estimation failures.
constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitEstimationError = 3;

std::string sibling_path(const std::string& data_path, const std::string& suffix) {
    const std::size_t dot = data_path.rfind('.');
    const std::size_t slash = data_path.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return data_path + suffix;
    }
    return data_path.substr(0, dot) + suffix + data_path.substr(dot);
}

void write_labels_csv(const std::string& path, const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << "index,label,special\n";
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        const bool special =
            std::find(dataset.special_indices.begin(), dataset.special_indices.end(),
                      static_cast<int>(i)) != dataset.special_indices.end();
        out << i << ',' << dataset.labels[i] << ',' << (special ? 1 : 0) << '\n';
    }
    if (!out) {
        throw DataError("write to '" + path + "' failed");
    }
}

std::vector<std::string> column_names(Eigen::Index p) {
    std::vector<std::string> names(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        names[static_cast<std::size_t>(j)] = "v" + std::to_string(j);
    }
    return names;
}

json snapshot_to_json(const ParamSnapshot& snap) {
    json weights = json::array();
    for (Eigen::Index g = 0; g < snap.weights.size(); ++g) {
        weights.push_back(snap.weights(g));
    }
    json means = json::array();
    for (Eigen::Index g = 0; g < snap.means.cols(); ++g) {
        json mean = json::array();
        for (Eigen::Index r = 0; r < snap.means.rows(); ++r) {
            mean.push_back(snap.means(r, g));
        }
        means.push_back(std::move(mean));
    }
    json covariances = json::array();
    for (const auto& cov : snap.covariances) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < cov.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < cov.cols(); ++c) {
                row.push_back(cov(r, c));
            }
            rows.push_back(std::move(row));
        }
        covariances.push_back(std::move(rows));
    }
    return json{{"weights", std::move(weights)},
                {"means", std::move(means)},
                {"covariances", std::move(covariances)}};
}

/// Fit/benchmark flags plus the CLI11 handles needed to tell "user passed it"
/// from "default", so config-file values only fill the gaps.
struct RunFlags {
    std::string algorithm = "em";
    RunConfig config;
    std::string init = "kmeans";
    std::string config_path;
    int min_bootstrap = 0;  // staging slot; 0 means untouched

    CLI::Option* algorithm_opt = nullptr;
    CLI::Option* g_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
    CLI::Option* eps_b_opt = nullptr;
    CLI::Option* dw_alpha_opt = nullptr;
    CLI::Option* dw_window_opt = nullptr;
    CLI::Option* min_bootstrap_opt = nullptr;
    CLI::Option* max_bootstrap_opt = nullptr;
    CLI::Option* max_iter_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* init_opt = nullptr;

    void register_options(CLI::App* cmd, bool with_algorithm) {
        if (with_algorithm) {
            algorithm_opt =
                cmd->add_option("-a,--algorithm", algorithm,
                                "One of em, spectral-em, boot-em, spectral-boot-em, "
                                "boot-spectral")
                    ->default_val(algorithm);
        }
        g_opt = cmd->add_option("-g,--groups", config.num_components,
                                "Number of mixture components")
                    ->default_val(config.num_components);
        eps_opt = cmd->add_option("--eps", config.eps,
                                  "EM lack-of-progress threshold")
                      ->default_val(config.eps);
        eps_b_opt = cmd->add_option("--eps-b", config.eps_b,
                                    "Bootstrap parameter-difference threshold")
                        ->default_val(config.eps_b);
        dw_alpha_opt = cmd->add_option("--dw-alpha", config.dw_alpha,
                                       "Durbin-Watson significance level")
                           ->default_val(config.dw_alpha);
        dw_window_opt = cmd->add_option("--dw-window", config.dw_window,
                                        "Durbin-Watson trailing window length")
                            ->default_val(config.dw_window);
        min_bootstrap_opt =
            cmd->add_option("--min-bootstrap", min_bootstrap,
                            "Minimum bootstrap samples before stopping checks "
                            "(default 500 for boot-em, 300 for spectral variants)");
        max_bootstrap_opt = cmd->add_option("--max-bootstrap", config.max_bootstrap,
                                            "Bootstrap iteration cap")
                                ->default_val(config.max_bootstrap);
        max_iter_opt = cmd->add_option("--max-iter", config.max_iter,
                                       "Inner EM iteration cap")
                           ->default_val(config.max_iter);
        seed_opt = cmd->add_option("-s,--seed", config.seed, "Random seed")
                       ->default_val(config.seed);
        init_opt = cmd->add_option("--init", init, "Initialization: kmeans or random")
                       ->default_val(init);
        cmd->add_option("-c,--config", config_path,
                        "JSON config file; command-line flags take precedence");
    }

    /// Fold in config-file values, then re-assert explicit flags on top.
    void resolve() {
        if (config_path.empty()) {
            finish();
            return;
        }
        std::ifstream in(config_path);
        if (!in) {
            throw DataError("cannot open config file '" + config_path + "'");
        }
        json doc;
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw DataError("config file '" + config_path + "': " + e.what());
        }
        for (const auto& [key, value] : doc.items()) {
            if (key == "algorithm") {
                if (!algorithm_opt || !*algorithm_opt) algorithm = value.get<std::string>();
            } else if (key == "g" || key == "groups") {
                if (!*g_opt) config.num_components = value.get<int>();
            } else if (key == "eps") {
                if (!*eps_opt) config.eps = value.get<double>();
            } else if (key == "eps_b") {
                if (!*eps_b_opt) config.eps_b = value.get<double>();
            } else if (key == "dw_alpha") {
                if (!*dw_alpha_opt) config.dw_alpha = value.get<double>();
            } else if (key == "dw_window") {
                if (!*dw_window_opt) config.dw_window = value.get<int>();
            } else if (key == "min_bootstrap") {
                if (!*min_bootstrap_opt) min_bootstrap = value.get<int>();
            } else if (key == "max_bootstrap") {
                if (!*max_bootstrap_opt) config.max_bootstrap = value.get<int>();
            } else if (key == "max_iter") {
                if (!*max_iter_opt) config.max_iter = value.get<int>();
            } else if (key == "seed") {
                if (!*seed_opt) config.seed = value.get<std::uint64_t>();
            } else if (key == "init") {
                if (!*init_opt) init = value.get<std::string>();
            } else {
                throw DataError("config file '" + config_path + "': unknown key '" +
                                key + "'");
            }
        }
        finish();
    }

private:
    void finish() {
        if (min_bootstrap > 0) {
            config.min_bootstrap = min_bootstrap;
        }
        if (init == "kmeans") {
            config.init = InitStrategy::KMeans;
        } else if (init == "random") {
            config.init = InitStrategy::Random;
        } else {
            throw DataError("unknown init strategy '" + init + "'");
        }
    }
};

json summarize(const FitResult& result, const std::string& algorithm, int n) {
    const long rho =
        count_free_parameters(result.model.num_components(), result.estimation_dim);
    json summary{
        {"algorithm", algorithm},
        {"num_components", result.model.num_components()},
        {"log_likelihood", result.log_likelihood},
        {"free_parameters", rho},
        // BIC is computed in the space the model was fitted in; spectral runs
        // are not comparable to original-space runs.
        {"bic", bic(result.log_likelihood, rho, n)},
        {"estimation_space",
         result.space == EstimationSpace::Spectral ? "spectral" : "original"},
        {"estimation_dim", result.estimation_dim},
        {"elapsed_seconds", result.elapsed_seconds},
        {"svd_count", result.svd_count},
        {"converged", !result.trace.empty() && result.trace.back().converged},
    };
    if (result.bootstrap_iterations.has_value()) {
        summary["bootstrap_iterations"] = *result.bootstrap_iterations;
        summary["never_oob"] = result.never_oob;
    } else {
        summary["bootstrap_iterations"] = nullptr;
    }
    if (result.std_errors.has_value()) {
        summary["std_errors"] = snapshot_to_json(*result.std_errors);
    } else {
        summary["std_errors"] = nullptr;
    }
    return summary;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    out << "iteration,log_likelihood,criterion,converged\n";
    for (const auto& rec : trace) {
        out << rec.iteration << ',' << format_double(rec.log_likelihood) << ','
            << format_double(rec.criterion) << ',' << (rec.converged ? 1 : 0) << '\n';
    }
    if (!out) {
        throw DataError("write to '" + path + "' failed");
    }
}

int cmd_simulate(const std::string& kind, int n_per_group, int dim, int timepoints,
                 int changers, int gmm_n, int gmm_groups, double gmm_separation,
                 std::uint64_t seed, const std::string& out_path) {
    LabeledDataset dataset;
    if (kind == "mirror") {
        dataset = generate_mirror(n_per_group, dim, seed);
    } else if (kind == "crossover") {
        dataset = generate_cross_over(n_per_group, timepoints, changers, seed);
    } else if (kind == "gmm") {
        MixtureModel model;
        model.components.resize(static_cast<std::size_t>(gmm_groups));
        for (int g = 0; g < gmm_groups; ++g) {
            auto& comp = model.components[static_cast<std::size_t>(g)];
            comp.weight = 1.0 / gmm_groups;
            comp.mean = Eigen::VectorXd::Constant(dim, g * gmm_separation);
            comp.covariance = Eigen::MatrixXd::Identity(dim, dim);
        }
        dataset = generate_gmm(model, gmm_n, seed);
    } else {
        throw DataError("unknown dataset kind '" + kind + "'");
    }

    write_csv(out_path, dataset.data, column_names(dataset.data.cols()));
    write_labels_csv(sibling_path(out_path, "_labels"), dataset);
    std::cout << "wrote " << dataset.data.rows() << " rows x " << dataset.data.cols()
              << " columns to " << out_path << '\n';
    return kExitOk;
}

int cmd_fit(const std::string& data_path, RunFlags& flags,
            const std::string& out_prefix) {
    flags.resolve();
    const Eigen::MatrixXd data = read_csv(data_path);
    const Algorithm algorithm = algorithm_from_name(flags.algorithm);
    const FitResult result = run_algorithm(algorithm, data, flags.config);

    const json summary = summarize(result, flags.algorithm, static_cast<int>(data.rows()));
    std::ofstream summary_out(out_prefix + "_summary.json");
    if (!summary_out) {
        throw DataError("cannot open '" + out_prefix + "_summary.json' for writing");
    }
    summary_out << summary.dump(2) << '\n';

    write_csv(out_prefix + "_memberships.csv", result.memberships);
    if (result.oob_memberships.has_value()) {
        write_csv(out_prefix + "_oob.csv", *result.oob_memberships);
    }
    write_trace_csv(out_prefix + "_trace.csv", result.trace);

    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_benchmark(const std::string& data_path, const std::string& kind,
                  std::vector<std::string> algorithms, int repeats, RunFlags& flags,
                  std::uint64_t data_seed, const std::string& out_path) {
    flags.resolve();
    if (repeats < 1) {
        throw DataError("repeats must be at least 1");
    }
    if (algorithms.empty()) {
        algorithms = {"boot-em", "spectral-boot-em", "boot-spectral"};
    }

    Eigen::MatrixXd data;
    std::vector<int> probes;
    if (!data_path.empty()) {
        data = read_csv(data_path);
    } else if (kind == "mirror") {
        LabeledDataset dataset = generate_mirror(500, 150, data_seed);
        data = std::move(dataset.data);
        probes = dataset.special_indices;
    } else if (kind == "crossover") {
        LabeledDataset dataset = generate_cross_over(150, 41, 3, data_seed);
        data = std::move(dataset.data);
        probes = dataset.special_indices;
    } else {
        throw DataError("benchmark needs --data or --kind mirror|crossover");
    }

    std::ofstream out(out_path);
    if (!out) {
        throw DataError("cannot open '" + out_path + "' for writing");
    }
    out << "algorithm,repeat,seed,status,elapsed_seconds,bootstrap_samples,"
           "log_likelihood,converged";
    for (std::size_t k = 0; k < probes.size(); ++k) {
        for (int g = 0; g < flags.config.num_components; ++g) {
            out << ",probe" << k << "_g" << g;
        }
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
        for (int g = 0; g < flags.config.num_components; ++g) {
            out << ",probe" << k << "_oob_g" << g;
        }
    }
    out << '\n';

    bool all_ok = true;
    for (const auto& name : algorithms) {
        const Algorithm algorithm = algorithm_from_name(name);
        for (int rep = 0; rep < repeats; ++rep) {
            RunConfig cfg = flags.config;
            cfg.seed = flags.config.seed + static_cast<std::uint64_t>(rep);
            out << name << ',' << rep << ',' << cfg.seed;
            try {
                const FitResult result = run_algorithm(algorithm, data, cfg);
                out << ",ok," << format_double(result.elapsed_seconds) << ',';
                if (result.bootstrap_iterations.has_value()) {
                    out << *result.bootstrap_iterations;
                }
                out << ',' << format_double(result.log_likelihood) << ','
                    << (!result.trace.empty() && result.trace.back().converged ? 1 : 0);
                for (const int probe : probes) {
                    for (int g = 0; g < cfg.num_components; ++g) {
                        out << ',' << format_double(result.memberships(probe, g));
                    }
                }
                for (const int probe : probes) {
                    for (int g = 0; g < cfg.num_components; ++g) {
                        if (result.oob_memberships.has_value()) {
                            out << ',' << format_double((*result.oob_memberships)(probe, g));
                        } else {
                            out << ',';
                        }
                    }
                }
                out << '\n';
            } catch (const Error& e) {
                all_ok = false;
                out << ",error: " << e.what() << ",,,";
                for (std::size_t k = 0; k < probes.size() * 2; ++k) {
                    for (int g = 0; g < cfg.num_components; ++g) out << ',';
                }
                out << '\n';
            }
        }
    }
    out.flush();
    if (!out) {
        throw DataError("write to '" + out_path + "' failed");
    }
    std::cout << "wrote benchmark table to " << out_path << '\n';
    return all_ok ? kExitOk : kExitEstimationError;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("SPECMIX_THREADS")) {
        Eigen::setNbThreads(std::atoi(threads));
    }

    CLI::App app{"Gaussian mixture estimation with spectral and bootstrap variants"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a labeled synthetic dataset");
    std::string sim_kind;
    int sim_n_per_group = 0, sim_dim = 0, sim_timepoints = 41, sim_changers = 3;
    int sim_gmm_n = 300, sim_gmm_groups = 3;
    double sim_gmm_separation = 10.0;
    std::uint64_t sim_seed = 1;
    std::string sim_out = "data.csv";
    sim->add_option("kind", sim_kind, "mirror, crossover, or gmm")->required();
    sim->add_option("--n-per-group", sim_n_per_group,
                    "Observations per group (mirror: 500, crossover: 150)");
    sim->add_option("-d,--dim", sim_dim, "Dimensions (mirror: 150, gmm: 5)");
    sim->add_option("--timepoints", sim_timepoints, "Time points (crossover)")
        ->default_val(sim_timepoints);
    sim->add_option("--changers", sim_changers, "Group-changing probes (crossover)")
        ->default_val(sim_changers);
    sim->add_option("-n,--num-points", sim_gmm_n, "Total observations (gmm)")
        ->default_val(sim_gmm_n);
    sim->add_option("-g,--groups", sim_gmm_groups, "Components (gmm)")
        ->default_val(sim_gmm_groups);
    sim->add_option("--separation", sim_gmm_separation,
                    "Distance between consecutive component means per coordinate (gmm)")
        ->default_val(sim_gmm_separation);
    sim->add_option("-s,--seed", sim_seed, "Random seed")->default_val(sim_seed);
    sim->add_option("-o,--out", sim_out, "Output CSV path")->default_val(sim_out);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a mixture model to a CSV dataset");
    std::string fit_data;
    std::string fit_prefix = "fit";
    RunFlags fit_flags;
    fit->add_option("data", fit_data, "Input CSV (optional header row)")->required();
    fit->add_option("-o,--out-prefix", fit_prefix,
                    "Prefix for _summary.json, _memberships.csv, _oob.csv, _trace.csv")
        ->default_val(fit_prefix);
    fit_flags.register_options(fit, true);

    // benchmark
    auto* bench = app.add_subcommand("benchmark",
                                     "Run algorithms repeatedly with varying seeds");
    std::string bench_data, bench_kind;
    std::vector<std::string> bench_algorithms;
    int bench_repeats = 5;
    std::uint64_t bench_data_seed = 1;
    std::string bench_out = "benchmark.csv";
    RunFlags bench_flags;
    bench->add_option("--data", bench_data, "Input CSV; alternative to --kind");
    bench->add_option("--kind", bench_kind, "Generated dataset: mirror or crossover");
    bench->add_option("--algorithms", bench_algorithms,
                      "Algorithms to compare (default: the three bootstrapped ones)")
        ->delimiter(',');
    bench->add_option("-r,--repeats", bench_repeats, "Repeats per algorithm")
        ->default_val(bench_repeats);
    bench->add_option("--data-seed", bench_data_seed, "Seed for --kind generation")
        ->default_val(bench_data_seed);
    bench->add_option("-o,--out", bench_out, "Output table CSV")->default_val(bench_out);
    bench_flags.register_options(bench, false);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) {
            if (sim_n_per_group == 0) sim_n_per_group = sim_kind == "crossover" ? 150 : 500;
            if (sim_dim == 0) sim_dim = sim_kind == "gmm" ? 5 : 150;
            return cmd_simulate(sim_kind, sim_n_per_group, sim_dim, sim_timepoints,
                                sim_changers, sim_gmm_n, sim_gmm_groups,
                                sim_gmm_separation, sim_seed, sim_out);
        }
        if (fit->parsed()) {
            return cmd_fit(fit_data, fit_flags, fit_prefix);
        }
        return cmd_benchmark(bench_data, bench_kind, bench_algorithms, bench_repeats,
                             bench_flags, bench_data_seed, bench_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const EmptyComponentError& e) {
        std::cerr << "estimation error: " << e.what() << '\n';
        return kExitEstimationError;
    } catch (const NumericalError& e) {
        std::cerr << "estimation error: " << e.what() << '\n';
        return kExitEstimationError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}
