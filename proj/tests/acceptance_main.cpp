// Acceptance gates for the laboratory. Each numbered gate prints one
// [PASS]/[FAIL] line plus indented measurements, and the process exits with
// the number of failed gates. Tolerances are pinned here, next to the checks
// they guard. Gates 4 and 5 run the desk-scale configs shipped in configs/;
// gate 6 re-runs them through the CLI front end and compares output bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covlab/commands.hpp"
#include "covlab/common.hpp"
#include "covlab/config_file.hpp"
#include "covlab/dataset.hpp"
#include "covlab/harness.hpp"
#include "covlab/lasso_path.hpp"
#include "covlab/rng.hpp"
#include "covlab/significance.hpp"
#include "covlab/solvers.hpp"
#include "covlab/stats.hpp"

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace covlab;

namespace {

constexpr std::uint64_t kAcceptSeed = 2026;

struct Gate {
    bool ok = true;
    std::vector<std::string> lines;
    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            lines.push_back("unmet: " + what);
        }
    }
    void note(const std::string& what) { lines.push_back(what); }
};

int run_gate(int number, const std::string& title, const std::function<void(Gate&)>& body) {
    Gate gate;
    try {
        body(gate);
    } catch (const std::exception& e) {
        gate.ok = false;
        gate.lines.push_back(std::string("exception: ") + e.what());
    }
    std::printf("[%s] criterion %d: %s\n", gate.ok ? "PASS" : "FAIL", number, title.c_str());
    for (const std::string& line : gate.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    return gate.ok ? 0 : 1;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string config_path(const char* name) {
    return std::string(COVLAB_CONFIG_DIR) + "/" + name;
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

const ScreeningCurve& find_curve(const ExperimentReport& report, int n, double sigma) {
    for (const ScreeningCurve& curve : report.screening_curves) {
        if (curve.n == n && curve.sigma == sigma) return curve;
    }
    throw Error("acceptance: no screening curve for n=" + std::to_string(n));
}

const QQSeries& find_series(const ExperimentReport& report, double c0, double c) {
    for (const QQSeries& series : report.qq_series) {
        if (series.c0 == c0 && series.c == c) return series;
    }
    throw Error("acceptance: no qq series for c0=" + num(c0));
}

// --- gate 1: orthonormal global-null calibration ---------------------------

void gate_orthonormal_null(Gate& gate) {
    const int n = 100, p = 100, reps = 2000;
    Eigen::VectorXd stats(reps);
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t seed = derive_stream(kAcceptSeed, "orthonull", rep);
        Dataset d;
        d.X = generate_design(n, p, 0.0, seed);
        d.beta_star = Eigen::VectorXd::Zero(p);
        d.y = generate_response(d.X, d.beta_star, 1.0, seed);
        d = orthonormalize(std::move(d));
        const SolutionPath path = lars_path(d.X, d.y, 2);
        stats[rep] = covariance_statistic(d.X, d.y, path, 1, 1.0, 1.0).statistic;
    }
    const double mean = stats.mean();
    const double ks = ks_distance(stats, NullDist::Exp1);
    gate.note("mean T_1 = " + num(mean) + " over " + std::to_string(reps) + " replicates");
    gate.note("KS distance to Exp(1) = " + num(ks));
    gate.check(std::abs(mean - 1.0) <= 0.1, "|mean - 1| <= 0.1");
    gate.check(ks < 0.05, "KS < 0.05");
}

// --- gate 2: path knots against coordinate descent / closed form -----------

void gate_path_oracles(Gate& gate) {
    double max_cd_gap = 0.0;
    int instances = 0;
    for (int p : {5, 20}) {
        Eigen::VectorXd beta(p);
        beta.setZero();
        if (p >= 7) {
            beta = reference_beta_star(p);
        } else {
            beta << 1.0, -0.5, 0.7, 0.0, 0.0;
        }
        for (int rep = 0; rep < 50; ++rep) {
            const std::uint64_t seed =
                derive_stream(kAcceptSeed, "pathoracle", static_cast<std::uint64_t>(p * 100 + rep));
            Dataset d;
            d.X = generate_design(50, p, 0.5, seed);
            d.beta_star = beta;
            d.y = generate_response(d.X, beta, 0.3, seed);
            d = standardize(std::move(d));
            const SolutionPath path = lars_path(d.X, d.y, 3 * p);
            for (int t = 1; t <= path.steps(); ++t) {
                const CoefficientVector cd = lasso_at(d.X, d.y, path.knot(t));
                const double gap =
                    (cd.values - path.knot_solutions[static_cast<std::size_t>(t) - 1])
                        .lpNorm<Eigen::Infinity>();
                max_cd_gap = std::max(max_cd_gap, gap);
            }
            ++instances;
        }
    }
    gate.note("max |knot solution - lasso_at| over " + std::to_string(instances) +
              " instances = " + num(max_cd_gap));
    gate.check(max_cd_gap < 1e-6, "knot solutions match coordinate descent < 1e-6");

    double max_soft_gap = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::uint64_t seed = derive_stream(kAcceptSeed, "orthopath", rep);
        Dataset d;
        d.X = generate_design(50, 20, 0.0, seed);
        d.beta_star = reference_beta_star(20);
        d = orthonormalize(std::move(d));
        d.y = generate_response(d.X, d.beta_star, 0.3, seed);
        const Eigen::VectorXd z = d.X.transpose() * d.y / 50.0;
        const SolutionPath path = lars_path(d.X, d.y, 25);
        for (int t = 1; t <= path.steps(); ++t) {
            const double lambda = path.knot(t);
            for (int j = 0; j < 20; ++j) {
                const double closed = soft_threshold(z[j], lambda);
                max_soft_gap = std::max(
                    max_soft_gap,
                    std::abs(path.knot_solutions[static_cast<std::size_t>(t) - 1][j] - closed));
            }
        }
    }
    gate.note("max orthonormal soft-threshold gap = " + num(max_soft_gap));
    gate.check(max_soft_gap < 1e-8, "orthonormal knots match soft threshold < 1e-8");
}

// --- gate 3: combined solver against the 2-D brute-force oracle ------------

void gate_combined_oracle(Gate& gate) {
    const double lambda0s[] = {0.0, 0.05, 0.12};
    const double lambdas[] = {0.05, 0.1, 0.2};
    const double shapes[] = {0.6, 2.0, 8.0};
    int within = 0, certified = 0;
    const int reps = 100;
    double worst_excess = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t seed = derive_stream(kAcceptSeed, "combo2d", rep);
        Dataset d;
        d.X = generate_design(20, 2, 0.3, seed);
        Eigen::VectorXd beta(2);
        beta << 1.2, -0.8;
        d.beta_star = beta;
        d.y = generate_response(d.X, beta, 0.5, seed);
        d = standardize(std::move(d));
        PenaltySpec pen;
        pen.lambda0 = lambda0s[rep % 3];
        pen.lambda = lambdas[(rep / 3) % 3];
        pen.a = shapes[(rep / 9) % 3];

        const CoefficientVector sol = combined_solve(d.X, d.y, pen);
        const Eigen::Vector2d oracle = oracles::combined_2d(d.X, d.y, pen);
        const double f_sol = combined_objective(d.X, d.y, sol.values, pen);
        const double f_oracle =
            combined_objective(d.X, d.y, Eigen::VectorXd(oracle), pen);
        const double excess = f_sol - f_oracle;
        worst_excess = std::max(worst_excess, excess);
        if (excess <= 1e-4) ++within;
        if (combined_certificate_gap(d.X, d.y, sol.values, pen) <= 1e-8) ++certified;
    }
    gate.note("objective within 1e-4 of brute force on " + std::to_string(within) + "/" +
              std::to_string(reps) + " (worst excess " + num(worst_excess) + ")");
    gate.note("local-optimality certificate held on " + std::to_string(certified) + "/" +
              std::to_string(reps));
    gate.check(within >= 90, "objective within 1e-4 of the oracle on >= 90% of instances");
    gate.check(certified == reps, "certificate gap <= 1e-8 on every instance");
}

// --- gate 4: screening experiment orderings --------------------------------

void gate_screening(Gate& gate) {
    const ExperimentConfig cfg = load_experiment_config(config_path("screening_desk.cfg"));
    const ExperimentReport report = run_screening(cfg);

    bool monotone = true;
    for (const ScreeningCurve& curve : report.screening_curves) {
        for (std::size_t s = 1; s < curve.probability.size(); ++s) {
            if (curve.probability[s] < curve.probability[s - 1]) monotone = false;
        }
    }
    gate.check(monotone, "every curve non-decreasing in model size");

    for (double sigma : cfg.sigma_values) {
        const double f80 = find_curve(report, 80, sigma).probability.back();
        const double f120 = find_curve(report, 120, sigma).probability.back();
        gate.note("final frequency at sigma=" + num(sigma) + ": n=80 -> " + num(f80) +
                  ", n=120 -> " + num(f120));
        gate.check(f120 >= f80 - 0.05,
                   "freq(n=120) >= freq(n=80) - 0.05 at sigma=" + num(sigma));
    }

    const ScreeningCurve& low = find_curve(report, 100, 0.15);
    const ScreeningCurve& high = find_curve(report, 100, 0.3);
    double worst_margin = 1.0;
    for (std::size_t s = 0; s < low.probability.size(); ++s) {
        worst_margin = std::min(worst_margin, low.probability[s] - high.probability[s]);
    }
    gate.note("n=100 pointwise margin freq(0.15) - freq(0.3): worst = " + num(worst_margin));
    gate.check(worst_margin >= -0.05, "freq(sigma=0.15) >= freq(sigma=0.3) - 0.05 pointwise");
}

// --- gate 5: null-distribution transition ----------------------------------

void gate_qq_transition(Gate& gate) {
    const ExperimentConfig cfg = load_experiment_config(config_path("qq_desk.cfg"));
    const ExperimentReport report = run_qq(cfg);

    for (const QQSeries& series : report.qq_series) {
        gate.note("c0=" + num(series.c0) + ", c=" + num(series.c) + ": m=" +
                  std::to_string(series.statistics.size()) + ", skipped=" +
                  std::to_string(series.skipped) + ", KS(Exp1)=" + num(series.ks_exp1) +
                  ", KS(chisq1)=" + num(series.ks_chisq1));
    }

    const QQSeries& loose = find_series(report, 0.6, 1.0);
    const QQSeries& tight = find_series(report, 0.1, 1.0);
    gate.check(loose.ks_exp1 < tight.ks_exp1,
               "KS(T; Exp1) at c0=0.6 below KS(T; Exp1) at c0=0.1 (both c=1)");
    // Known shortfall: at c0=0.1 the measured statistics sit well to the right
    // of both reference laws (sample mean ~3, no mass near zero), so the
    // chi-squared(1) ordering does not materialize at c=1. Kept as a strict
    // gate rather than weakened; the printed KS table shows the margins.
    gate.check(tight.ks_chisq1 < tight.ks_exp1,
               "KS(T; chisq1) below KS(T; Exp1) at c0=0.1, c=1");
}

// --- gate 6: byte determinism through the CLI ------------------------------

int quiet_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("covtestlab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream sink_out, sink_err;
    std::streambuf* old_out = std::cout.rdbuf(sink_out.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(sink_err.rdbuf());
    int rc = -1;
    try {
        rc = run_cli(static_cast<int>(argv.size()), argv.data());
    } catch (...) {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
        throw;
    }
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return rc;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("acceptance: cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Compare every csv/svg in two run directories (the manifest carries wall
// time, so it is not part of the byte contract).
void compare_runs(Gate& gate, const fs::path& a, const fs::path& b, const std::string& label) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(a)) {
        const std::string name = entry.path().filename().string();
        if (name != "manifest.json") names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    gate.check(!names.empty(), label + ": first run produced comparable files");
    for (const std::string& name : names) {
        const bool same = fs::exists(b / name) && slurp(a / name) == slurp(b / name);
        gate.check(same, label + ": " + name + " byte-identical across runs");
    }
    gate.note(label + ": compared " + std::to_string(names.size()) + " files");
}

void gate_determinism(Gate& gate) {
    const fs::path root = fs::temp_directory_path() / "covlab_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);

    const std::string screen_cfg = config_path("screening_desk.cfg");
    const std::string qq_cfg = config_path("qq_desk.cfg");
    if (quiet_cli({"screening", screen_cfg, "--out", (root / "s1").string(), "--threads", "1"}) !=
            0 ||
        quiet_cli({"screening", screen_cfg, "--out", (root / "s3").string(), "--threads", "3"}) !=
            0 ||
        quiet_cli({"qq", qq_cfg, "--out", (root / "q1").string(), "--threads", "1"}) != 0 ||
        quiet_cli({"qq", qq_cfg, "--out", (root / "q3").string(), "--threads", "3"}) != 0) {
        gate.check(false, "all four CLI runs exited 0");
        fs::remove_all(root);
        return;
    }
    compare_runs(gate, root / "s1", root / "s3", "screening, threads 1 vs 3");
    compare_runs(gate, root / "q1", root / "q3", "qq, threads 1 vs 3");
    fs::remove_all(root);
}

// --- gate 7: reduction identities ------------------------------------------

void gate_reductions(Gate& gate) {
    // (i) c = 1 equals T_k assembled directly from its definition: constrained
    // refits with and without the entering variable at the next knot.
    double worst_direct = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::uint64_t seed = derive_stream(kAcceptSeed, "reduce1", rep);
        Dataset d;
        d.X = generate_design(60, 30, 0.5, seed);
        d.beta_star = reference_beta_star(30);
        d.y = generate_response(d.X, d.beta_star, 1.0, seed);
        d = standardize(std::move(d));
        const SolutionPath path = lars_path(d.X, d.y, 12);
        int k = 0;
        for (int t = 1; t < path.steps(); ++t) {
            if (path.events[static_cast<std::size_t>(t) - 1].kind == EventKind::Add) {
                k = t;
                break;
            }
        }
        if (k == 0) throw Error("acceptance: no testable entry step");
        const CovTestResult res = covariance_statistic(d.X, d.y, path, k, 1.0, 1.0);

        SupportSet before;
        for (int t = 1; t < k; ++t) {
            const PathEvent& ev = path.events[static_cast<std::size_t>(t) - 1];
            if (ev.kind == EventKind::Add) {
                before.insert(ev.variable);
            } else {
                before.erase(ev.variable);
            }
        }
        SupportSet with = before;
        with.insert(path.events[static_cast<std::size_t>(k) - 1].variable);
        const double lam = path.knot(k + 1);
        const CoefficientVector incl = constrained_lasso(d.X, d.y, with, lam);
        const CoefficientVector excl = constrained_lasso(d.X, d.y, before, lam);
        const double direct =
            (d.y.dot(d.X * incl.values) - d.y.dot(d.X * excl.values)) / 1.0;
        const double gap =
            std::abs(res.statistic - direct) / std::max(1.0, std::abs(direct));
        worst_direct = std::max(worst_direct, gap);
    }
    gate.note("worst |T_{k,c=1} - direct T_k| (relative, floor 1) = " + num(worst_direct));
    gate.check(worst_direct <= 1e-8, "c=1 equals direct T_k recomputation within 1e-8");

    // (ii) combined statistic in the L1 limit: shape a = 1e6 and lambda0 = 0
    // on a grid hugging the lasso knots from below reproduces the lasso
    // statistic.
    double worst_limit = 0.0;
    int done = 0;
    for (std::uint64_t seed_tag = 0; seed_tag < 60 && done < 20; ++seed_tag) {
        const std::uint64_t seed = derive_stream(kAcceptSeed, "reduce2", seed_tag);
        Dataset d;
        d.X = generate_design(60, 20, 0.3, seed);
        d.beta_star = reference_beta_star(20);
        d.y = generate_response(d.X, d.beta_star, 0.5, seed);
        d = standardize(std::move(d));
        const SolutionPath path = lars_path(d.X, d.y, 8);
        if (path.steps() < 3) continue;
        bool adds_only = true;
        for (int t = 1; t <= 3; ++t) {
            if (path.events[static_cast<std::size_t>(t) - 1].kind != EventKind::Add) {
                adds_only = false;
            }
        }
        if (!adds_only) continue;

        const CovTestResult lasso_res =
            covariance_statistic(d.X, d.y, path, 2, 1.0, 0.25);
        // Grid points sit just below the knots. The offset must stay well
        // above 1/a: the limit penalty's slope is lambda * (a+1)/a, which eats
        // a factor (1 - 1/a) of the margin.
        std::vector<double> grid;
        grid.push_back(path.knot(1) * 1.02);
        for (int t = 1; t <= path.steps(); ++t) grid.push_back(path.knot(t) * (1.0 - 1e-5));
        const CombinedPath cpath = combined_path(d.X, d.y, 0.0, grid, 1e6);
        const CovTestResult limit_res =
            combined_covariance_statistic(d.X, d.y, cpath, 2, 1.0, 0.25);
        const double gap = std::abs(limit_res.statistic - lasso_res.statistic) /
                           std::max(1.0, std::abs(lasso_res.statistic));
        worst_limit = std::max(worst_limit, gap);
        ++done;
    }
    gate.note("L1-limit agreement measured on " + std::to_string(done) +
              " instances; worst relative gap = " + num(worst_limit));
    gate.check(done == 20, "20 instances with three clean entry steps");
    gate.check(worst_limit <= 1e-3, "a=1e6, lambda0=0 limit matches the lasso statistic "
                                    "within 1e-3");
}

}  // namespace

int main() {
    int failures = 0;
    failures += run_gate(1, "orthonormal global-null calibration", gate_orthonormal_null);
    failures += run_gate(2, "path knots vs coordinate descent and closed form", gate_path_oracles);
    failures += run_gate(3, "combined solver vs brute-force oracle", gate_combined_oracle);
    failures += run_gate(4, "screening frequency orderings", gate_screening);
    failures += run_gate(5, "null-distribution transition", gate_qq_transition);
    failures += run_gate(6, "byte-identical outputs across runs and threads", gate_determinism);
    failures += run_gate(7, "reduction identities", gate_reductions);
    if (failures == 0) {
        std::printf("acceptance: all criteria met\n");
    } else {
        std::printf("acceptance: %d criterion(s) unmet\n", failures);
    }
    return failures;
}
