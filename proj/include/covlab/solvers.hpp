#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "covlab/dataset.hpp"
#include "covlab/lasso_path.hpp"

namespace covlab {

// L1 level lambda0, concave (SICA) level lambda, SICA shape a > 0. The combined
// objective is (2n)^{-1}||y - X b||^2 + lambda0 ||b||_1 + sum_j p(|b_j|) with
// p(t) = lambda (a+1) t / (a + t).
struct PenaltySpec {
    double lambda0 = 0.0;
    double lambda = 0.0;
    double a = 1.0;
};

// Solver output: coefficients plus the support under the exact-zero convention
// and the achieved objective value.
struct CoefficientVector {
    Eigen::VectorXd values;
    SupportSet support;
    double objective = 0.0;
};

double sica(double t, double lambda, double a);
double sica_derivative(double t, double lambda, double a);

// Objective evaluators (lasso_objective is the lambda = 0 special case of the
// combined one; kept separate for clarity in tests).
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);
double combined_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, const PenaltySpec& penalty);

// Exact minimizer of the scalar subproblem
//   q(b) = (1/2)(b - z)^2 + lambda0 |b| + lambda (a+1)|b| / (a + |b|),
// obtained from the stationarity cubic on each sign branch plus b = 0.
double combined_scalar_min(double z, const PenaltySpec& penalty);

// Cyclic coordinate-descent Lasso at a fixed lambda; KKT residual <= 1e-8 on
// return. Optional warm start.
CoefficientVector lasso_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                           const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

// Lasso minimizer restricted to the given support (exact zeros elsewhere).
// lambda = 0 gives the least-squares refit (minimum-norm when rank-deficient).
CoefficientVector constrained_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const SupportSet& support, double lambda);

// Coordinate descent with exact scalar steps on the combined objective. The
// default init is lasso_at(lambda0). Returns a certified local minimizer: every
// coordinate globally minimizes its scalar subproblem given the others.
CoefficientVector combined_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const PenaltySpec& penalty,
                                 const std::optional<Eigen::VectorXd>& init = std::nullopt);

// Largest scalar-suboptimality gap max_j [ q_j(beta_j) - min_b q_j(b) ] of a
// solution; the local-optimality certificate asserts this is ~0.
double combined_certificate_gap(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, const PenaltySpec& penalty);

// Combined-objective minimizer restricted to a support.
CoefficientVector constrained_combined(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const SupportSet& support, const PenaltySpec& penalty);

// Warm-started solutions along a descending lambda grid for the concave level
// (lambda0 fixed). Events mark the first grid point where a coefficient becomes
// nonzero (Add) or returns to zero (Drop); within a grid point Adds precede
// Drops, each in ascending column order. Re-entries count as new events.
struct CombinedPathPoint {
    double lambda = 0.0;
    CoefficientVector solution;
};

struct CombinedPathEvent {
    int grid_index = 0;  // 0-based position in the grid
    EventKind kind = EventKind::Add;
    int variable = -1;
};

struct CombinedPath {
    double lambda0 = 0.0;
    double a = 1.0;
    std::vector<double> grid;
    std::vector<CombinedPathPoint> points;
    std::vector<CombinedPathEvent> events;
};

CombinedPath combined_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda0,
                           const std::vector<double>& lambda_grid, double a);

// The default grid: `size` geometric points from lambda_max = ||X^T y||_inf / n
// down to 0.01 * lambda_max.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        int size);

}  // namespace covlab
