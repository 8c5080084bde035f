#include "covlab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "covlab/common.hpp"

namespace covlab {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kChangeTol = 1e-8;   // max coordinate change per sweep
constexpr double kKktTol = 1e-8;

void check_column_scale(const Eigen::MatrixXd& X, const char* who) {
    const double n = static_cast<double>(X.rows());
    for (int j = 0; j < X.cols(); ++j) {
        if (std::abs(X.col(j).squaredNorm() - n) > 1e-8 * n) {
            throw ContractError(std::string(who) + ": column " + std::to_string(j + 1) +
                                " is not scaled to squared norm n; standardize first");
        }
    }
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

// Real roots of x^3 + b2 x^2 + b1 x + b0, Cardano with the trigonometric
// three-real-root branch, polished by two Newton steps each.
int cubic_real_roots(double b2, double b1, double b0, double out[3]) {
    const double p = b1 - b2 * b2 / 3.0;
    const double q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    const double shift = -b2 / 3.0;
    int count = 0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        out[count++] = u + v + shift;
    } else if (p == 0.0 && q == 0.0) {
        out[count++] = shift;
    } else {
        const double r = std::sqrt(-p / 3.0);
        const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
        const double theta = std::acos(arg);
        for (int k = 0; k < 3; ++k) {
            out[count++] = 2.0 * r * std::cos((theta - 2.0 * std::numbers::pi * k) / 3.0) + shift;
        }
    }
    for (int i = 0; i < count; ++i) {
        for (int it = 0; it < 2; ++it) {
            const double x = out[i];
            const double f = ((x + b2) * x + b1) * x + b0;
            const double df = (3.0 * x + 2.0 * b2) * x + b1;
            if (df != 0.0) out[i] = x - f / df;
        }
    }
    return count;
}

double scalar_q(double b, double z, const PenaltySpec& pen) {
    const double d = b - z;
    const double t = std::abs(b);
    return 0.5 * d * d + pen.lambda0 * t + pen.lambda * (pen.a + 1.0) * t / (pen.a + t);
}

// Positive-branch candidates: stationary points of q on b > 0 solve
// b^3 + (2a - c1) b^2 + (a^2 - 2 a c1) b + (K - a^2 c1) = 0
// with c1 = z - lambda0 and K = lambda a (a+1).
void positive_branch_candidates(double z, const PenaltySpec& pen, double& best_b, double& best_q) {
    const double a = pen.a;
    const double c1 = z - pen.lambda0;
    const double K = pen.lambda * a * (a + 1.0);
    double roots[3];
    const int m = cubic_real_roots(2.0 * a - c1, a * a - 2.0 * a * c1, K - a * a * c1, roots);
    for (int i = 0; i < m; ++i) {
        const double b = roots[i];
        if (b <= 0.0 || !std::isfinite(b)) continue;
        const double qb = scalar_q(b, z, pen);
        if (qb < best_q) {
            best_q = qb;
            best_b = b;
        }
    }
}

}  // namespace

double sica(double t, double lambda, double a) {
    if (t < 0.0) throw ParameterError("sica: t must be non-negative");
    return lambda * (a + 1.0) * t / (a + t);
}

double sica_derivative(double t, double lambda, double a) {
    if (t < 0.0) throw ParameterError("sica_derivative: t must be non-negative");
    const double at = a + t;
    return lambda * (a + 1.0) * a / (at * at);
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(X.rows());
    return (y - X * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

double combined_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, const PenaltySpec& penalty) {
    const double n = static_cast<double>(X.rows());
    double pen = 0.0;
    for (int j = 0; j < beta.size(); ++j) {
        const double t = std::abs(beta[j]);
        pen += penalty.lambda0 * t + penalty.lambda * (penalty.a + 1.0) * t / (penalty.a + t);
    }
    return (y - X * beta).squaredNorm() / (2.0 * n) + pen;
}

double combined_scalar_min(double z, const PenaltySpec& penalty) {
    if (!(penalty.a > 0.0)) throw ParameterError("combined_scalar_min: need a > 0");
    if (penalty.lambda == 0.0) {
        return soft_threshold(z, penalty.lambda0);  // pure lasso shortcut
    }
    double best_b = 0.0;
    double best_q = scalar_q(0.0, z, penalty);
    positive_branch_candidates(z, penalty, best_b, best_q);
    // Negative branch by symmetry: minimize the mirrored problem at -z.
    double mbest_b = 0.0;
    double mbest_q= best_q;
    positive_branch_candidates(-z, penalty, mbest_b, mbest_q);
    if (mbest_q < best_q && mbest_b > 0.0) {
        best_b = -mbest_b;
    }
    return best_b;
}

namespace {

// Shared cyclic CD core for the lasso. Maintains the residual; beta is updated
// in place. Returns the final KKT residual.
double lasso_cd_core(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                     Eigen::VectorXd& beta) {
    const int p = static_cast<int>(X.cols());
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd r = y - X * beta;
    double kkt = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            const double old = beta[j];
            const double z = X.col(j).dot(r) / n + old;
            const double next = soft_threshold(z, lambda);
            if (next != old) {
                r += (old - next) * X.col(j);
                beta[j] = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        if (max_change < kChangeTol) {
            // Verify optimality; keep sweeping if the certificate is not met yet.
            const Eigen::VectorXd c = X.transpose() * r / n;
            kkt = 0.0;
            for (int j = 0; j < p; ++j) {
                if (beta[j] != 0.0) {
                    kkt = std::max(kkt, std::abs(c[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0)));
                } else {
                    kkt = std::max(kkt, std::max(0.0, std::abs(c[j]) - lambda));
                }
            }
            if (kkt <= kKktTol) {
                for (int j = 0; j < p; ++j) {
                    if (beta[j] != 0.0 && std::abs(beta[j]) < kZeroSnap) beta[j] = 0.0;
                }
                return kkt;
            }
        }
    }
    throw ConvergenceError("lasso_at: no convergence after " + std::to_string(kMaxSweeps) +
                           " sweeps; KKT residual " + format_g17(kkt));
}

CoefficientVector finish_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                               Eigen::VectorXd beta) {
    CoefficientVector out;
    out.objective = lasso_objective(X, y, beta, lambda);
    out.support = SupportSet::from_nonzeros(beta);
    out.values = std::move(beta);
    return out;
}

}  // namespace

CoefficientVector lasso_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                           const std::optional<Eigen::VectorXd>& warm_start) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw ParameterError("lasso_at: lambda must be finite and non-negative");
    }
    if (y.size() != X.rows()) throw ContractError("lasso_at: X and y row counts differ");
    check_column_scale(X, "lasso_at");
    Eigen::VectorXd beta;
    if (warm_start) {
        if (warm_start->size() != X.cols()) {
            throw ParameterError("lasso_at: warm start has wrong length");
        }
        beta = *warm_start;
    } else {
        beta = Eigen::VectorXd::Zero(X.cols());
    }
    lasso_cd_core(X, y, lambda, beta);
    return finish_lasso(X, y, lambda, std::move(beta));
}

CoefficientVector constrained_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const SupportSet& support, double lambda) {
    const int p = static_cast<int>(X.cols());
    if (!support.empty() && (support.indices().front() < 0 || support.indices().back() >= p)) {
        throw ParameterError("constrained_lasso: support index out of range");
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (support.empty()) {
        return finish_lasso(X, y, lambda, std::move(beta));
    }
    const int m = support.size();
    Eigen::MatrixXd Xs(X.rows(), m);
    for (int i = 0; i < m; ++i) Xs.col(i) = X.col(support.indices()[static_cast<std::size_t>(i)]);
    Eigen::VectorXd bs;
    if (lambda == 0.0) {
        // Unpenalized refit: least squares, minimum-norm on rank deficiency.
        bs = Xs.completeOrthogonalDecomposition().solve(y);
    } else {
        check_column_scale(Xs, "constrained_lasso");
        bs = Eigen::VectorXd::Zero(m);
        lasso_cd_core(Xs, y, lambda, bs);
    }
    for (int i = 0; i < m; ++i) beta[support.indices()[static_cast<std::size_t>(i)]] = bs[i];
    return finish_lasso(X, y, lambda, std::move(beta));
}

namespace {

// Cyclic CD with exact scalar minimization for the combined objective.
// Monotone by construction; an objective increase is a genuine internal error.
void combined_cd_core(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const PenaltySpec& pen, Eigen::VectorXd& beta, const char* who) {
    const int p = static_cast<int>(X.cols());
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd r = y - X * beta;
    double obj = r.squaredNorm() / (2.0 * n);
    for (int j = 0; j < p; ++j) {
        const double t = std::abs(beta[j]);
        obj += pen.lambda0 * t + pen.lambda * (pen.a + 1.0) * t / (pen.a + t);
    }
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            const double old = beta[j];
            const double z = X.col(j).dot(r) / n + old;
            const double next = combined_scalar_min(z, pen);
            if (next != old) {
                r += (old - next) * X.col(j);
                beta[j] = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        const double prev_obj = obj;
        obj = r.squaredNorm() / (2.0 * n);
        for (int j = 0; j < p; ++j) {
            const double t = std::abs(beta[j]);
            obj += pen.lambda0 * t + pen.lambda * (pen.a + 1.0) * t / (pen.a + t);
        }
        if (obj > prev_obj + 1e-12 * std::max(1.0, std::abs(prev_obj))) {
            throw NumericalError(std::string(who) + ": objective increased from " +
                                 format_g17(prev_obj) + " to " + format_g17(obj) +
                                 " (monotonicity breach)");
        }
        if (max_change < kChangeTol) {
            for (int j = 0; j < p; ++j) {
                if (beta[j] != 0.0 && std::abs(beta[j]) < kZeroSnap) {
                    r += beta[j] * X.col(j);
                    beta[j] = 0.0;
                }
            }
            return;
        }
    }
    throw ConvergenceError(std::string(who) + ": no convergence after " +
                           std::to_string(kMaxSweeps) + " sweeps");
}

CoefficientVector finish_combined(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const PenaltySpec& pen, Eigen::VectorXd beta) {
    CoefficientVector out;
    out.objective = combined_objective(X, y, beta, pen);
    out.support = SupportSet::from_nonzeros(beta);
    out.values = std::move(beta);
    return out;
}

}  // namespace

double combined_certificate_gap(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta, const PenaltySpec& penalty) {
    const double n = static_cast<double>(X.rows());
    const Eigen::VectorXd r = y - X * beta;
    double gap = 0.0;
    for (int j = 0; j < X.cols(); ++j) {
        const double z = X.col(j).dot(r) / n + beta[j];
        const double best = combined_scalar_min(z, penalty);
        gap = std::max(gap, scalar_q(beta[j], z, penalty) - scalar_q(best, z, penalty));
    }
    return gap;
}

CoefficientVector combined_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const PenaltySpec& penalty,
                                 const std::optional<Eigen::VectorXd>& init) {
    if (!(penalty.a > 0.0) || penalty.lambda0 < 0.0 || penalty.lambda < 0.0 ||
        !std::isfinite(penalty.lambda0) || !std::isfinite(penalty.lambda)) {
        throw ParameterError("combined_solve: need finite lambda0, lambda >= 0 and a > 0");
    }
    if (y.size() != X.rows()) throw ContractError("combined_solve: X and y row counts differ");
    check_column_scale(X, "combined_solve");
    Eigen::VectorXd beta;
    if (init) {
        if (init->size() != X.cols()) throw ParameterError("combined_solve: init has wrong length");
        beta = *init;
    } else {
        beta = lasso_at(X, y, penalty.lambda0).values;
    }
    combined_cd_core(X, y, penalty, beta, "combined_solve");
    const double gap = combined_certificate_gap(X, y, beta, penalty);
    if (gap > 1e-9) {
        throw ConvergenceError("combined_solve: local-optimality certificate gap " +
                               format_g17(gap) + " exceeds 1e-9");
    }
    return finish_combined(X, y, penalty, std::move(beta));
}

CoefficientVector constrained_combined(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const SupportSet& support, const PenaltySpec& penalty) {
    const int p = static_cast<int>(X.cols());
    if (!support.empty() && (support.indices().front() < 0 || support.indices().back() >= p)) {
        throw ParameterError("constrained_combined: support index out of range");
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (support.empty()) {
        return finish_combined(X, y, penalty, std::move(beta));
    }
    const int m = support.size();
    Eigen::MatrixXd Xs(X.rows(), m);
    for (int i = 0; i < m; ++i) Xs.col(i) = X.col(support.indices()[static_cast<std::size_t>(i)]);
    check_column_scale(Xs, "constrained_combined");
    Eigen::VectorXd bs = Eigen::VectorXd::Zero(m);
    if (penalty.lambda0 > 0.0) {
        lasso_cd_core(Xs, y, penalty.lambda0, bs);  // default init: lasso at lambda0
    }
    combined_cd_core(Xs, y, penalty, bs, "constrained_combined");
    for (int i = 0; i < m; ++i) beta[support.indices()[static_cast<std::size_t>(i)]] = bs[i];
    return finish_combined(X, y, penalty, std::move(beta));
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        int size) {
    if (size < 2) throw ParameterError("default_lambda_grid: need at least 2 grid points");
    const double n = static_cast<double>(X.rows());
    const double lam_max = (X.transpose() * y / n).cwiseAbs().maxCoeff();
    if (lam_max <= 0.0) {
        throw ParameterError("default_lambda_grid: X^T y is zero; no positive lambda range");
    }
    std::vector<double> grid(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
        grid[static_cast<std::size_t>(i)] =
            lam_max * std::pow(0.01, static_cast<double>(i) / (size - 1));
    }
    return grid;
}

CombinedPath combined_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda0,
                           const std::vector<double>& lambda_grid, double a) {
    if (!(a > 0.0)) throw ParameterError("combined_path: need a > 0");
    if (lambda0 < 0.0 || !std::isfinite(lambda0)) {
        throw ParameterError("combined_path: lambda0 must be finite and non-negative");
    }
    if (lambda_grid.empty()) throw ParameterError("combined_path: empty lambda grid");
    for (std::size_t i = 0; i + 1 < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > lambda_grid[i + 1])) {
            throw ParameterError("combined_path: grid must be strictly descending at position " +
                                 std::to_string(i + 1));
        }
    }
    if (lambda_grid.back() < 0.0) throw ParameterError("combined_path: negative grid value");
    check_column_scale(X, "combined_path");

    CombinedPath cpath;
    cpath.lambda0 = lambda0;
    cpath.a = a;
    cpath.grid = lambda_grid;
    cpath.points.reserve(lambda_grid.size());

    Eigen::VectorXd beta = lasso_at(X, y, lambda0).values;
    SupportSet prev;  // all grid values sit above the first entry threshold initially
    for (std::size_t t = 0; t < lambda_grid.size(); ++t) {
        const PenaltySpec pen{lambda0, lambda_grid[t], a};
        try {
            combined_cd_core(X, y, pen, beta, "combined_path");
        } catch (const Error& e) {
            throw ConvergenceError("combined_path: grid position " + std::to_string(t) + " (lambda " +
                                   format_g17(lambda_grid[t]) + "): " + e.what());
        }
        CombinedPathPoint point;
        point.lambda = lambda_grid[t];
        point.solution = finish_combined(X, y, pen, beta);
        const SupportSet& cur = point.solution.support;
        for (int j : cur.indices()) {
            if (!prev.contains(j)) {
                cpath.events.push_back({static_cast<int>(t), EventKind::Add, j});
            }
        }
        for (int j : prev.indices()) {
            if (!cur.contains(j)) {
                cpath.events.push_back({static_cast<int>(t), EventKind::Drop, j});
            }
        }
        prev = cur;
        cpath.points.push_back(std::move(point));
    }
    return cpath;
}

}  // namespace covlab
