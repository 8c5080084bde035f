#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "covlab/stats.hpp"

namespace covlab {

enum class ExperimentKind { Screening, QQ };

// Knobs for the two Monte Carlo studies.  Screening sweeps (n, sigma) pairs
// and tracks how often the solution path captures the true support within a
// model-size budget; QQ sweeps (c0, c) pairs and collects the test statistic
// for the eighth entering variable.  lambda0 is always recomputed from
// (c0, sigma, n) on demand so a stale value can never leak into a run.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Screening;
    std::vector<int> n_values{100};
    int p = 200;
    double rho = 0.5;
    std::vector<double> sigma_values{0.3};
    int replicates = 100;
    std::uint64_t base_seed = 20260822;
    std::vector<double> c0_values{0.25};  // lambda0 = c0 * sigma * sqrt(log(p)/n)
    double a = 0.35;                      // concave-penalty shape
    std::vector<double> c_values{1.0};    // refit shrink factors in [0, 1]
    int max_model_size = 40;              // screening horizon
    int grid_size = 100;                  // penalty grid resolution
    int threads = 1;

    double lambda0(double c0, double sigma, int n) const;
};

// One screening replicate, reduced to the smallest model size that captures
// every true variable (0 when the budgeted path never does).
struct ScreeningRecord {
    int n = 0;
    double sigma = 0.0;
    int replicate = 0;
    int first_screened_size = 0;
};

struct ScreeningCurve {
    int n = 0;
    double sigma = 0.0;
    std::vector<double> probability;  // index s-1 holds the frequency at size s
};

struct QQRecord {
    int replicate = 0;
    bool skipped = false;
    std::string skip_reason;
    std::vector<double> statistic;  // aligned with c_values; empty when skipped
};

// Sorted statistics for one (c0, c) cell together with the theoretical
// quantiles at plotting positions (i - 0.5)/m and goodness-of-fit summaries.
struct QQSeries {
    double c0 = 0.0;
    double c = 1.0;
    Eigen::VectorXd statistics;
    Eigen::VectorXd q_exp1;
    Eigen::VectorXd q_chisq1;
    double ks_exp1 = 0.0;
    double ks_chisq1 = 0.0;
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    int skipped = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ScreeningRecord> screening_records;
    std::vector<ScreeningCurve> screening_curves;        // one per (n, sigma)
    std::vector<std::vector<QQRecord>> qq_records;       // outer index: c0
    std::vector<QQSeries> qq_series;                     // c0-major, then c
    double wall_seconds = 0.0;
};

ExperimentReport run_screening(const ExperimentConfig& config);
ExperimentReport run_qq(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

// Runs body(0..num_tasks-1) on up to `threads` workers.  Tasks are claimed
// through an atomic cursor, so any interleaving may execute, but each task
// writes only its own slot; the first exception aborts the run.
void parallel_for(int num_tasks, int threads, const std::function<void(int)>& body);

void write_screening_csv(const ExperimentReport& report, const std::string& path);
void write_qq_csv(const ExperimentReport& report, const std::string& path);

}  // namespace covlab
