#include "covlab/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "covlab/common.hpp"
#include "covlab/config_file.hpp"
#include "covlab/dataset.hpp"
#include "covlab/harness.hpp"
#include "covlab/lasso_path.hpp"
#include "covlab/rng.hpp"
#include "covlab/significance.hpp"
#include "covlab/solvers.hpp"
#include "covlab/svg.hpp"

namespace fs = std::filesystem;

namespace covlab {

namespace {

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string digest_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot reopen " + path.string() + " for digesting");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return hex;
}

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["kind"] = cfg.kind == ExperimentKind::Screening ? "screening" : "qq";
    j["n"] = cfg.n_values;
    j["p"] = cfg.p;
    j["rho"] = cfg.rho;
    j["sigma"] = cfg.sigma_values;
    j["replicates"] = cfg.replicates;
    j["base_seed"] = cfg.base_seed;
    j["c0"] = cfg.c0_values;
    j["a"] = cfg.a;
    j["c"] = cfg.c_values;
    j["max_model_size"] = cfg.max_model_size;
    j["grid_size"] = cfg.grid_size;
    j["threads"] = cfg.threads;
    return j;
}

nlohmann::ordered_json outputs_json(const fs::path& dir, const std::vector<std::string>& names) {
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const std::string& name : names) {
        nlohmann::ordered_json entry;
        entry["file"] = name;
        entry["fnv1a64"] = digest_file(dir / name);
        outputs.push_back(std::move(entry));
    }
    return outputs;
}

// Written after every other artifact: its presence marks a completed run.
void write_manifest(const fs::path& dir, const nlohmann::ordered_json& manifest) {
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << manifest.dump(2) << '\n';
    out.flush();
    if (!out) throw Error("write failed for " + path.string());
}

fs::path ensure_out_dir(const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ParameterError("cannot create output directory " + dir.string() + ": " +
                             ec.message());
    }
    return dir;
}

// Model data arrive on whatever scale the user produced them. Solvers require
// squared column norms equal to n, so data already on that scale pass through
// untouched (orthogonal designs stay orthogonal); anything else is centered
// and rescaled, with y centered to match.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> prepare_model_data(Eigen::MatrixXd X,
                                                               Eigen::VectorXd y) {
    const Eigen::Index n = X.rows();
    if (y.size() != n) {
        throw ParameterError("X has " + std::to_string(n) + " rows but y has " +
                             std::to_string(y.size()) + " values");
    }
    if (n < 2) throw ParameterError("need at least two observations");
    bool on_scale = true;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (std::abs(X.col(j).squaredNorm() - static_cast<double>(n)) >
            1e-8 * static_cast<double>(n)) {
            on_scale = false;
            break;
        }
    }
    if (on_scale) return {std::move(X), std::move(y)};
    Dataset d;
    d.X = std::move(X);
    d.y = std::move(y);
    d = standardize(std::move(d));
    return {std::move(d.X), std::move(d.y)};
}

// Path-shape failures discovered while computing a statistic (path too short,
// no following knot) are runtime conditions of the data, not usage errors:
// re-throw them on the exit-1 branch.
template <typename Fn>
auto data_shape_as_runtime(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParameterError& e) {
        throw Error(e.what());
    }
}

void print_test_row(std::ostream& out, const CovTestResult& res) {
    out << res.k << ',' << (res.variable + 1) << ',' << format_g17(res.c) << ','
        << format_g17(res.lambda_next) << ',' << format_g17(res.statistic) << ','
        << format_g17(res.p_exp1) << ',' << format_g17(res.p_chisq1) << '\n';
}

}  // namespace

void cmd_screening(const std::string& config_path, const std::string& out_dir, int threads) {
    if (threads < 1) throw ParameterError("screening: threads must be >= 1");
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (cfg.kind != ExperimentKind::Screening) {
        throw ParameterError("screening: config '" + config_path + "' has kind 'qq'");
    }
    cfg.threads = threads;

    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport report = run_screening(cfg);
    const fs::path dir = ensure_out_dir(out_dir);
    write_screening_csv(report, (dir / "screening.csv").string());
    write_screening_svg(report, (dir / "screening.svg").string());

    nlohmann::ordered_json manifest;
    manifest["command"] = "screening";
    manifest["tool_version"] = kToolVersion;
    manifest["config_path"] = config_path;
    manifest["config"] = config_json(cfg);
    manifest["base_seed"] = cfg.base_seed;
    manifest["outputs"] = outputs_json(dir, {"screening.csv", "screening.svg"});
    nlohmann::ordered_json curves = nlohmann::ordered_json::array();
    for (const ScreeningCurve& curve : report.screening_curves) {
        nlohmann::ordered_json entry;
        entry["n"] = curve.n;
        entry["sigma"] = curve.sigma;
        entry["probability_at_max"] =
            curve.probability.empty() ? 0.0 : curve.probability.back();
        curves.push_back(std::move(entry));
    }
    manifest["curves"] = std::move(curves);
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, manifest);
}

void cmd_qq(const std::string& config_path, const std::string& out_dir, int threads) {
    if (threads < 1) throw ParameterError("qq: threads must be >= 1");
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (cfg.kind != ExperimentKind::QQ) {
        throw ParameterError("qq: config '" + config_path + "' has kind 'screening'");
    }
    cfg.threads = threads;

    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport report = run_qq(cfg);
    const fs::path dir = ensure_out_dir(out_dir);
    write_qq_csv(report, (dir / "qq.csv").string());

    std::vector<std::string> names{"qq.csv"};
    for (const QQSeries& series : report.qq_series) {
        const std::string name =
            "qq_c0_" + fmt_g(series.c0) + "_c_" + fmt_g(series.c) + ".svg";
        write_qq_svg(series, (dir / name).string());
        names.push_back(name);
    }

    nlohmann::ordered_json manifest;
    manifest["command"] = "qq";
    manifest["tool_version"] = kToolVersion;
    manifest["config_path"] = config_path;
    manifest["config"] = config_json(cfg);
    manifest["base_seed"] = cfg.base_seed;
    manifest["outputs"] = outputs_json(dir, names);
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const QQSeries& series : report.qq_series) {
        nlohmann::ordered_json entry;
        entry["c0"] = series.c0;
        entry["c"] = series.c;
        entry["m"] = series.statistics.size();
        entry["skipped"] = series.skipped;
        entry["ks_exp1"] = series.ks_exp1;
        entry["ks_chisq1"] = series.ks_chisq1;
        entry["mean"] = series.sample_mean;
        entry["variance"] = series.sample_variance;
        cells.push_back(std::move(entry));
    }
    manifest["cells"] = std::move(cells);
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, manifest);
}

void cmd_test(const TestOptions& options, std::ostream& out) {
    if (options.k < 1) throw ParameterError("test: k must be >= 1");
    if (!(options.c >= 0.0 && options.c <= 1.0)) {
        throw ParameterError("test: c must lie in [0,1]");
    }
    if (!(options.sigma2 > 0.0) || !std::isfinite(options.sigma2)) {
        throw ParameterError("test: sigma2 must be positive and finite");
    }
    if (options.method != "lasso" && options.method != "combined") {
        throw ParameterError("test: method must be 'lasso' or 'combined'");
    }
    if (options.method == "combined") {
        if (!std::isfinite(options.lambda0) || options.lambda0 < 0.0) {
            throw ParameterError("test: lambda0 must be finite and non-negative");
        }
        if (!std::isfinite(options.a) || options.a <= 0.0) {
            throw ParameterError("test: shape a must be finite and positive");
        }
        if (options.grid_size < 2) throw ParameterError("test: grid_size must be >= 2");
    }

    auto [X, y] = prepare_model_data(load_design_csv(options.x_path),
                                     load_response_csv(options.y_path));

    out << "k,variable,c,lambda_next,statistic,p_exp1,p_chisq1\n";
    if (options.method == "lasso") {
        const int max_steps = std::max(64, 4 * (options.k + 1));
        const SolutionPath path = lars_path(X, y, max_steps);
        for (int step = 1; step <= options.k; ++step) {
            if (step <= path.steps() &&
                path.events[static_cast<std::size_t>(step) - 1].kind == EventKind::Drop) {
                continue;  // drops carry no entering variable to test
            }
            const CovTestResult res = data_shape_as_runtime([&] {
                return covariance_statistic(X, y, path, step, options.c, options.sigma2);
            });
            print_test_row(out, res);
        }
    } else {
        const std::vector<double> grid = default_lambda_grid(X, y, options.grid_size);
        const CombinedPath cpath = combined_path(X, y, options.lambda0, grid, options.a);
        for (int entry = 1; entry <= options.k; ++entry) {
            const CovTestResult res = data_shape_as_runtime([&] {
                return combined_covariance_statistic(X, y, cpath, entry, options.c,
                                                     options.sigma2);
            });
            print_test_row(out, res);
        }
    }
    out.flush();
}

void cmd_path(const std::string& x_path, const std::string& y_path, int max_steps,
              std::ostream& out) {
    if (max_steps < 1) throw ParameterError("path: max_steps must be >= 1");
    auto [X, y] = prepare_model_data(load_design_csv(x_path), load_response_csv(y_path));
    const SolutionPath path = lars_path(X, y, max_steps);
    out << "step,kind,variable,knot\n";
    for (const PathEvent& ev : path.events) {
        out << ev.step << ',' << (ev.kind == EventKind::Add ? "add" : "drop") << ','
            << (ev.variable + 1) << ',' << format_g17(ev.knot) << '\n';
    }
    out.flush();
}

void cmd_simulate(const SimulateOptions& options, const std::string& out_dir) {
    if (options.n < 2) throw ParameterError("simulate: n must be >= 2");
    if (options.p < 7) {
        throw ParameterError("simulate: p must be >= 7 to hold the 7-sparse signal");
    }
    if (!std::isfinite(options.rho) || options.rho < 0.0 || options.rho >= 1.0) {
        throw ParameterError("simulate: rho must lie in [0, 1)");
    }
    if (!std::isfinite(options.sigma) || options.sigma < 0.0) {
        throw ParameterError("simulate: sigma must be finite and non-negative");
    }
    const Eigen::MatrixXd X = generate_design(options.n, options.p, options.rho, options.seed);
    const Eigen::VectorXd beta = reference_beta_star(options.p);
    const Eigen::VectorXd y = generate_response(X, beta, options.sigma, options.seed);
    const fs::path dir = ensure_out_dir(out_dir);
    save_design_csv(X, (dir / "X.csv").string());
    save_response_csv(y, (dir / "y.csv").string());
    save_response_csv(beta, (dir / "beta.csv").string());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"penalized-regression laboratory: lasso paths, covariance significance tests, "
                 "and combined-penalty experiments"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    int threads_flag = 0;
    app.add_option("--threads", threads_flag, "worker threads (fallback: COVTESTLAB_THREADS, then 1)")
        ->envname("COVTESTLAB_THREADS")
        ->check(CLI::PositiveNumber);

    std::string screen_config, screen_out = ".";
    CLI::App* s_screen = app.add_subcommand("screening", "run the sure-screening experiment");
    s_screen->fallthrough();
    s_screen->add_option("config", screen_config, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    s_screen->add_option("--out", screen_out, "output directory (default .)");

    std::string qq_config, qq_out = ".";
    CLI::App* s_qq = app.add_subcommand("qq", "run the null-distribution experiment");
    s_qq->fallthrough();
    s_qq->add_option("config", qq_config, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    s_qq->add_option("--out", qq_out, "output directory (default .)");

    TestOptions topts;
    CLI::App* s_test = app.add_subcommand("test", "covariance test on supplied X.csv/y.csv");
    s_test->fallthrough();
    s_test->add_option("--x", topts.x_path, "design matrix CSV")->required()->check(CLI::ExistingFile);
    s_test->add_option("--y", topts.y_path, "response CSV")->required()->check(CLI::ExistingFile);
    s_test->add_option("--k", topts.k, "test entries 1..k (default 1)");
    s_test->add_option("--c", topts.c, "refit shrink factor in [0,1] (default 1)");
    s_test->add_option("--sigma2", topts.sigma2, "noise variance (default 1)");
    s_test->add_option("--method", topts.method, "lasso | combined (default lasso)")
        ->check(CLI::IsMember({"lasso", "combined"}));
    s_test->add_option("--lambda0", topts.lambda0, "combined: L1 level (default 0)");
    s_test->add_option("--a", topts.a, "combined: concave shape (default 1)");
    s_test->add_option("--grid-size", topts.grid_size, "combined: grid resolution (default 100)");

    std::string path_x, path_y;
    int path_max_steps = 500;
    CLI::App* s_path = app.add_subcommand("path", "print the lasso solution path knots");
    s_path->fallthrough();
    s_path->add_option("--x", path_x, "design matrix CSV")->required()->check(CLI::ExistingFile);
    s_path->add_option("--y", path_y, "response CSV")->required()->check(CLI::ExistingFile);
    s_path->add_option("--max-steps", path_max_steps, "event budget (default 500)");

    SimulateOptions sopts;
    std::string sim_out = ".";
    CLI::App* s_sim = app.add_subcommand("simulate", "write a simulated X.csv/y.csv/beta.csv");
    s_sim->fallthrough();
    s_sim->add_option("--n", sopts.n, "observations (default 100)");
    s_sim->add_option("--p", sopts.p, "variables (default 200)");
    s_sim->add_option("--rho", sopts.rho, "AR(1) correlation (default 0.5)");
    s_sim->add_option("--sigma", sopts.sigma, "noise level (default 0.3)");
    s_sim->add_option("--seed", sopts.seed, "dataset seed (default 1)");
    s_sim->add_option("--out", sim_out, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help / --version
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const int threads = threads_flag > 0 ? threads_flag : 1;
        if (s_screen->parsed()) {
            cmd_screening(screen_config, screen_out, threads);
        } else if (s_qq->parsed()) {
            cmd_qq(qq_config, qq_out, threads);
        } else if (s_test->parsed()) {
            cmd_test(topts, std::cout);
        } else if (s_path->parsed()) {
            cmd_path(path_x, path_y, path_max_steps, std::cout);
        } else if (s_sim->parsed()) {
            cmd_simulate(sopts, sim_out);
        }
        return 0;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace covlab
