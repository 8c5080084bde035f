#include "covlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <utility>

#include "covlab/common.hpp"
#include "covlab/dataset.hpp"
#include "covlab/lasso_path.hpp"
#include "covlab/rng.hpp"
#include "covlab/significance.hpp"
#include "covlab/solvers.hpp"

namespace covlab {

namespace {

// The null-distribution study always tests the eighth variable to enter: the
// simulated signal has seven nonzero coefficients, so entry eight is the first
// null variable under correct screening.
constexpr int kTestedEntry = 8;

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void validate_common(const ExperimentConfig& cfg) {
    if (cfg.replicates < 1) {
        throw ParameterError("experiment: replicates must be >= 1");
    }
    if (cfg.p < 7) {
        throw ParameterError("experiment: p must be >= 7 to hold the 7-sparse signal");
    }
    if (!std::isfinite(cfg.rho) || cfg.rho < 0.0 || cfg.rho >= 1.0) {
        throw ParameterError("experiment: rho must lie in [0, 1)");
    }
    if (cfg.n_values.empty()) {
        throw ParameterError("experiment: need at least one n");
    }
    for (int n : cfg.n_values) {
        if (n < 2) throw ParameterError("experiment: every n must be >= 2");
    }
    if (cfg.sigma_values.empty()) {
        throw ParameterError("experiment: need at least one sigma");
    }
    for (double s : cfg.sigma_values) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ParameterError("experiment: every sigma must be finite and non-negative");
        }
    }
    if (cfg.threads < 1) {
        throw ParameterError("experiment: threads must be >= 1");
    }
}

// Rethrow the active exception with a replicate-context prefix, preserving the
// error category so the CLI's exit-code mapping still sees the original kind.
[[noreturn]] void rethrow_with_context(const std::string& ctx) {
    try {
        throw;
    } catch (const ParameterError& e) {
        throw ParameterError(ctx + e.what());
    } catch (const ContractError& e) {
        throw ContractError(ctx + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(ctx + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(ctx + e.what());
    } catch (const Error& e) {
        throw Error(ctx + e.what());
    }
}

Dataset simulate_instance(const ExperimentConfig& cfg, int n, double sigma, std::uint64_t seed) {
    Dataset d;
    d.X = generate_design(n, cfg.p, cfg.rho, seed);
    d.beta_star = reference_beta_star(cfg.p);
    d.y = generate_response(d.X, d.beta_star, sigma, seed);
    d.sigma = sigma;
    d.rho = cfg.rho;
    d.seed = seed;
    return standardize(std::move(d));
}

double sample_mean(const Eigen::VectorXd& v) { return v.size() > 0 ? v.mean() : 0.0; }

double sample_variance(const Eigen::VectorXd& v) {
    const Eigen::Index m = v.size();
    if (m < 2) return 0.0;
    const double mu = v.mean();
    return (v.array() - mu).square().sum() / static_cast<double>(m - 1);
}

}  // namespace

double ExperimentConfig::lambda0(double c0, double sigma, int n) const {
    if (n < 2) throw ParameterError("lambda0: n must be >= 2");
    if (p < 2) throw ParameterError("lambda0: p must be >= 2");
    return c0 * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

void parallel_for(int num_tasks, int threads, const std::function<void(int)>& body) {
    if (num_tasks <= 0) return;
    const int workers = std::min(std::max(threads, 1), num_tasks);
    if (workers == 1) {
        for (int t = 0; t < num_tasks; ++t) body(t);
        return;
    }
    std::atomic<int> cursor{0};
    std::atomic<bool> bail{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&] {
        while (!bail.load(std::memory_order_relaxed)) {
            const int t = cursor.fetch_add(1, std::memory_order_relaxed);
            if (t >= num_tasks) return;
            try {
                body(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                bail.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

ExperimentReport run_screening(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::Screening) {
        throw ParameterError("run_screening: config kind is not Screening");
    }
    validate_common(cfg);
    if (cfg.max_model_size < 0) {
        throw ParameterError("run_screening: max_model_size must be non-negative");
    }

    const auto t0 = std::chrono::steady_clock::now();
    const int nsig = static_cast<int>(cfg.sigma_values.size());
    const int ncombo = static_cast<int>(cfg.n_values.size()) * nsig;
    const int tasks = ncombo * cfg.replicates;
    // Generous event budget: drops are rare, so the interesting prefix of the
    // path is covered many times over.
    const int max_steps = std::max(1000, 8 * cfg.max_model_size);

    std::vector<ScreeningRecord> records(static_cast<std::size_t>(tasks));
    parallel_for(tasks, cfg.threads, [&](int t) {
        const int combo = t / cfg.replicates;
        const int rep = t % cfg.replicates;
        const int n = cfg.n_values[static_cast<std::size_t>(combo / nsig)];
        const double sigma = cfg.sigma_values[static_cast<std::size_t>(combo % nsig)];
        try {
            const std::uint64_t seed =
                derive_stream(cfg.base_seed, "screening", static_cast<std::uint64_t>(t));
            const Dataset d = simulate_instance(cfg, n, sigma, seed);
            const SolutionPath path = lars_path(d.X, d.y, max_steps);
            const SupportSet truth = SupportSet::from_nonzeros(d.beta_star);
            int first = 0;
            for (int s = 1; s <= cfg.max_model_size; ++s) {
                if (screened_at_size(path, truth, s)) {
                    first = s;
                    break;
                }
            }
            records[static_cast<std::size_t>(t)] = ScreeningRecord{n, sigma, rep, first};
        } catch (...) {
            rethrow_with_context("(n=" + std::to_string(n) + ", sigma=" + fmt_g(sigma) +
                                 ", replicate=" + std::to_string(rep) + "): ");
        }
    });

    ExperimentReport report;
    report.config = cfg;
    report.screening_records = std::move(records);
    report.screening_curves.reserve(static_cast<std::size_t>(ncombo));
    for (int combo = 0; combo < ncombo; ++combo) {
        ScreeningCurve curve;
        curve.n = cfg.n_values[static_cast<std::size_t>(combo / nsig)];
        curve.sigma = cfg.sigma_values[static_cast<std::size_t>(combo % nsig)];
        curve.probability.assign(static_cast<std::size_t>(cfg.max_model_size), 0.0);
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            const ScreeningRecord& r =
                report.screening_records[static_cast<std::size_t>(combo * cfg.replicates + rep)];
            if (r.first_screened_size <= 0) continue;
            for (int s = r.first_screened_size; s <= cfg.max_model_size; ++s) {
                curve.probability[static_cast<std::size_t>(s) - 1] += 1.0;
            }
        }
        for (double& prob : curve.probability) prob /= static_cast<double>(cfg.replicates);
        report.screening_curves.push_back(std::move(curve));
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ExperimentReport run_qq(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::QQ) {
        throw ParameterError("run_qq: config kind is not QQ");
    }
    validate_common(cfg);
    if (cfg.n_values.size() != 1) {
        throw ParameterError("run_qq: expects exactly one n");
    }
    if (cfg.sigma_values.size() != 1) {
        throw ParameterError("run_qq: expects exactly one sigma");
    }
    if (cfg.c0_values.empty()) {
        throw ParameterError("run_qq: need at least one c0");
    }
    for (double c0 : cfg.c0_values) {
        if (!std::isfinite(c0) || c0 <= 0.0) {
            throw ParameterError("run_qq: every c0 must be finite and positive");
        }
    }
    if (cfg.c_values.empty()) {
        throw ParameterError("run_qq: need at least one c");
    }
    for (double c : cfg.c_values) {
        if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
            throw ParameterError("run_qq: every c must lie in [0, 1]");
        }
    }
    if (!std::isfinite(cfg.a) || cfg.a <= 0.0) {
        throw ParameterError("run_qq: shape a must be finite and positive");
    }
    if (cfg.grid_size < 2) {
        throw ParameterError("run_qq: grid_size must be >= 2");
    }
    const double sigma = cfg.sigma_values.front();
    if (sigma <= 0.0) {
        throw ParameterError("run_qq: sigma must be positive (the statistic divides by sigma^2)");
    }

    const auto t0 = std::chrono::steady_clock::now();
    const int n = cfg.n_values.front();
    const int nc0 = static_cast<int>(cfg.c0_values.size());
    const int tasks = nc0 * cfg.replicates;

    std::vector<QQRecord> flat(static_cast<std::size_t>(tasks));
    parallel_for(tasks, cfg.threads, [&](int t) {
        const int c0i = t / cfg.replicates;
        const int rep = t % cfg.replicates;
        const double c0 = cfg.c0_values[static_cast<std::size_t>(c0i)];
        try {
            // The dataset seed depends on the replicate only, so every c0 sees
            // the same instances and cross-c0 comparisons are paired.
            const std::uint64_t seed =
                derive_stream(cfg.base_seed, "qq", static_cast<std::uint64_t>(rep));
            const Dataset d = simulate_instance(cfg, n, sigma, seed);
            const double lam0 = cfg.lambda0(c0, sigma, n);
            const std::vector<double> grid = default_lambda_grid(d.X, d.y, cfg.grid_size);
            const CombinedPath cpath = combined_path(d.X, d.y, lam0, grid, cfg.a);
            QQRecord rec;
            rec.replicate = rep;
            try {
                for (double c : cfg.c_values) {
                    rec.statistic.push_back(
                        combined_covariance_statistic(d.X, d.y, cpath, kTestedEntry, c,
                                                      sigma * sigma)
                            .statistic);
                }
            } catch (const ParameterError& e) {
                // The path was too short for entry eight (or entry eight had no
                // following grid point): exclude the replicate and move on.
                rec.skipped = true;
                rec.skip_reason = e.what();
                rec.statistic.clear();
            }
            flat[static_cast<std::size_t>(t)] = std::move(rec);
        } catch (...) {
            rethrow_with_context("(c0=" + fmt_g(c0) + ", replicate=" + std::to_string(rep) +
                                 "): ");
        }
    });

    ExperimentReport report;
    report.config = cfg;
    report.qq_records.resize(static_cast<std::size_t>(nc0));
    for (int c0i = 0; c0i < nc0; ++c0i) {
        auto first = flat.begin() + static_cast<std::ptrdiff_t>(c0i) * cfg.replicates;
        report.qq_records[static_cast<std::size_t>(c0i)].assign(first, first + cfg.replicates);
    }

    for (int c0i = 0; c0i < nc0; ++c0i) {
        const std::vector<QQRecord>& records = report.qq_records[static_cast<std::size_t>(c0i)];
        int skipped = 0;
        for (const QQRecord& rec : records) skipped += rec.skipped ? 1 : 0;
        for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci) {
            QQSeries series;
            series.c0 = cfg.c0_values[static_cast<std::size_t>(c0i)];
            series.c = cfg.c_values[ci];
            series.skipped = skipped;
            std::vector<double> stats;
            stats.reserve(records.size());
            for (const QQRecord& rec : records) {
                if (!rec.skipped) stats.push_back(rec.statistic[ci]);
            }
            if (stats.empty()) {
                throw Error("run_qq: every replicate was skipped for c0=" + fmt_g(series.c0) +
                            ", c=" + fmt_g(series.c) + "; no statistics to aggregate");
            }
            std::sort(stats.begin(), stats.end());
            const Eigen::Index m = static_cast<Eigen::Index>(stats.size());
            series.statistics = Eigen::Map<const Eigen::VectorXd>(stats.data(), m);
            series.q_exp1.resize(m);
            series.q_chisq1.resize(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
                series.q_exp1[i] = null_quantile(q, NullDist::Exp1);
                series.q_chisq1[i] = null_quantile(q, NullDist::ChiSq1);
            }
            series.ks_exp1 = ks_distance(series.statistics, NullDist::Exp1);
            series.ks_chisq1 = ks_distance(series.statistics, NullDist::ChiSq1);
            series.sample_mean = sample_mean(series.statistics);
            series.sample_variance = sample_variance(series.statistics);
            report.qq_series.push_back(std::move(series));
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    switch (config.kind) {
        case ExperimentKind::Screening:
            return run_screening(config);
        case ExperimentKind::QQ:
            return run_qq(config);
    }
    throw ParameterError("run_experiment: unknown experiment kind");
}

void write_screening_csv(const ExperimentReport& report, const std::string& path) {
    if (report.config.kind != ExperimentKind::Screening) {
        throw ParameterError("write_screening_csv: report is not a screening report");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("write_screening_csv: cannot open " + path + " for writing");
    out << "n,sigma,model_size,probability\n";
    for (const ScreeningCurve& curve : report.screening_curves) {
        for (std::size_t s = 0; s < curve.probability.size(); ++s) {
            out << curve.n << ',' << format_g17(curve.sigma) << ',' << (s + 1) << ','
                << format_g17(curve.probability[s]) << '\n';
        }
    }
    out.flush();
    if (!out) throw Error("write_screening_csv: write failed for " + path);
}

void write_qq_csv(const ExperimentReport& report, const std::string& path) {
    if (report.config.kind != ExperimentKind::QQ) {
        throw ParameterError("write_qq_csv: report is not a qq report");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("write_qq_csv: cannot open " + path + " for writing");
    out << "c0,c,rank,statistic,q_exp1,q_chisq1\n";
    for (const QQSeries& series : report.qq_series) {
        for (Eigen::Index i = 0; i < series.statistics.size(); ++i) {
            out << format_g17(series.c0) << ',' << format_g17(series.c) << ',' << (i + 1) << ','
                << format_g17(series.statistics[i]) << ',' << format_g17(series.q_exp1[i]) << ','
                << format_g17(series.q_chisq1[i]) << '\n';
        }
    }
    out.flush();
    if (!out) throw Error("write_qq_csv: write failed for " + path);
}

}  // namespace covlab
