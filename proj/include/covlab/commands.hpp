#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace covlab {

inline constexpr const char* kToolVersion = "0.1.0";

// Flags for the single-instance significance-test command.
struct TestOptions {
    std::string x_path;
    std::string y_path;
    int k = 1;
    double c = 1.0;
    double sigma2 = 1.0;
    std::string method = "lasso";  // or "combined"
    double lambda0 = 0.0;          // combined only
    double a = 1.0;                // combined only
    int grid_size = 100;           // combined only
};

struct SimulateOptions {
    int n = 100;
    int p = 200;
    double rho = 0.5;
    double sigma = 0.3;
    std::uint64_t seed = 1;
};

// Command bodies shared by the CLI front end and the test harness. They throw:
// ParameterError/ContractError for usage- and input-shape problems (exit 2)
// and other Error kinds for runtime failures (exit 1); run_cli does the
// mapping. Experiment commands write their manifest last, so a manifest on
// disk marks a completed run.
void cmd_screening(const std::string& config_path, const std::string& out_dir, int threads);
void cmd_qq(const std::string& config_path, const std::string& out_dir, int threads);
void cmd_test(const TestOptions& options, std::ostream& out);
void cmd_path(const std::string& x_path, const std::string& y_path, int max_steps,
              std::ostream& out);
void cmd_simulate(const SimulateOptions& options, const std::string& out_dir);

// Full argv-level entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv);

}  // namespace covlab
