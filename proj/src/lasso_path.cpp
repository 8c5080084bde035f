#include "covlab/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "covlab/common.hpp"

namespace covlab {

namespace {

void check_column_scale(const Eigen::MatrixXd& X) {
    const double n = static_cast<double>(X.rows());
    for (int j = 0; j < X.cols(); ++j) {
        if (std::abs(X.col(j).squaredNorm() - n) > 1e-8 * n) {
            throw ContractError("lars_path: column " + std::to_string(j + 1) +
                                " is not scaled to squared norm n; standardize first");
        }
    }
}

// Segment geometry for a fixed active set: beta_A(lambda) = u - lambda * d with
// u = M^{-1} X_A^T y / n and d = M^{-1} s, M = X_A^T X_A / n.
struct Segment {
    Eigen::VectorXd u;
    Eigen::VectorXd d;
};

Segment solve_segment(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const std::vector<int>& active, const std::vector<double>& signs,
                      int step_for_error) {
    const int m = static_cast<int>(active.size());
    const double n = static_cast<double>(X.rows());
    Eigen::MatrixXd XA(X.rows(), m);
    for (int i = 0; i < m; ++i) XA.col(i) = X.col(active[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd M = XA.transpose() * XA / n;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("lars_path: singular active Gram matrix at step " +
                             std::to_string(step_for_error));
    }
    Segment seg;
    seg.u = llt.solve(XA.transpose() * y / n);
    Eigen::VectorXd s(m);
    for (int i = 0; i < m; ++i) s[i] = signs[static_cast<std::size_t>(i)];
    seg.d = llt.solve(s);
    return seg;
}

struct Candidate {
    double lambda = -1.0;
    bool is_drop = false;
    int variable = -1;
    double sign = 0.0;          // join sign for Add candidates
    int active_pos = -1;        // position in the active list for Drop candidates
};

// Prefer the largest lambda; on ties (within kTieTol) drops beat joins, then the
// smaller column index wins.
bool better(const Candidate& a, const Candidate& b) {
    if (b.variable < 0) return true;
    if (a.lambda > b.lambda + kTieTol) return true;
    if (a.lambda < b.lambda - kTieTol) return false;
    if (a.is_drop != b.is_drop) return a.is_drop;
    return a.variable < b.variable;
}

}  // namespace

SolutionPath lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_steps) {
    if (max_steps < 1) throw ParameterError("lars_path: max_steps must be >= 1");
    if (y.size() != X.rows()) throw ContractError("lars_path: X and y row counts differ");
    check_column_scale(X);

    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    const double nd = static_cast<double>(n);
    const int active_cap = std::min(n - 1, p);

    SolutionPath path;
    path.n = n;
    path.p = p;

    // First knot: lambda_1 = ||X^T y||_inf / n with the smallest-index tie rule.
    const Eigen::VectorXd c0 = X.transpose() * y / nd;
    double lam1 = 0.0;
    for (int j = 0; j < p; ++j) lam1 = std::max(lam1, std::abs(c0[j]));
    if (lam1 <= 0.0) {
        // y orthogonal to every column: the zero vector solves all lambda >= 0.
        path.has_tail = true;
        path.tail_floor = 0.0;
        path.tail_u = Eigen::VectorXd::Zero(p);
        path.tail_d = Eigen::VectorXd::Zero(p);
        return path;
    }
    int first = -1;
    for (int j = 0; j < p; ++j) {
        if (std::abs(c0[j]) >= lam1 - kTieTol) {
            first = j;
            break;
        }
    }

    std::vector<int> active{first};
    std::vector<double> signs{c0[first] > 0.0 ? 1.0 : -1.0};
    std::vector<bool> is_active(static_cast<std::size_t>(p), false);
    is_active[static_cast<std::size_t>(first)] = true;

    path.events.push_back({1, EventKind::Add, first, lam1});
    path.knot_solutions.push_back(Eigen::VectorXd::Zero(p));
    path.supports_after.push_back(SupportSet{{first}});

    double lam_cur = lam1;
    while (true) {
        if (path.steps() >= max_steps) return path;  // truncated: no tail
        if (static_cast<int>(active.size()) >= active_cap) break;

        const int step = path.steps() + 1;
        Segment seg = solve_segment(X, y, active, signs, step);

        // Correlations of inactive columns are affine in lambda:
        // c_j(lambda) = alpha_j + lambda * gamma_j.
        Eigen::VectorXd fit_u(n), fit_d(n);
        fit_u.setZero();
        fit_d.setZero();
        for (std::size_t i = 0; i < active.size(); ++i) {
            fit_u += seg.u[static_cast<Eigen::Index>(i)] * X.col(active[i]);
            fit_d += seg.d[static_cast<Eigen::Index>(i)] * X.col(active[i]);
        }
        const Eigen::VectorXd alpha = X.transpose() * (y - fit_u) / nd;
        const Eigen::VectorXd gamma = X.transpose() * fit_d / nd;

        Candidate best;
        for (int j = 0; j < p; ++j) {
            if (is_active[static_cast<std::size_t>(j)]) continue;
            // Join where c_j(lambda) = +lambda or -lambda.
            const double denom_pos = 1.0 - gamma[j];
            if (std::abs(denom_pos) > kTieTol) {
                const double lam = alpha[j] / denom_pos;
                if (lam > kTieTol && lam < lam_cur - kTieTol) {
                    Candidate cand{lam, false, j, 1.0, -1};
                    if (better(cand, best)) best = cand;
                }
            }
            const double denom_neg = -1.0 - gamma[j];
            if (std::abs(denom_neg) > kTieTol) {
                const double lam = alpha[j] / denom_neg;
                if (lam > kTieTol && lam < lam_cur - kTieTol) {
                    Candidate cand{lam, false, j, -1.0, -1};
                    if (better(cand, best)) best = cand;
                }
            }
        }
        for (std::size_t i = 0; i < active.size(); ++i) {
            // Active coefficient u_i - lambda d_i crosses zero at lambda = u_i/d_i.
            const double di = seg.d[static_cast<Eigen::Index>(i)];
            if (std::abs(di) <= kTieTol) continue;
            const double lam = seg.u[static_cast<Eigen::Index>(i)] / di;
            if (lam > kTieTol && lam < lam_cur - kTieTol) {
                Candidate cand{lam, true, active[i], 0.0, static_cast<int>(i)};
                if (better(cand, best)) best = cand;
            }
        }

        if (best.variable < 0) {
            // No event below lam_cur: the segment closes the path down to zero.
            path.has_tail = true;
            path.tail_floor = 0.0;
            path.tail_u = Eigen::VectorXd::Zero(p);
            path.tail_d = Eigen::VectorXd::Zero(p);
            for (std::size_t i = 0; i < active.size(); ++i) {
                path.tail_u[active[i]] = seg.u[static_cast<Eigen::Index>(i)];
                path.tail_d[active[i]] = seg.d[static_cast<Eigen::Index>(i)];
            }
            return path;
        }

        const double lam_next = std::min(best.lambda, lam_cur);  // clip to the segment
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (std::size_t i = 0; i < active.size(); ++i) {
            beta[active[i]] = seg.u[static_cast<Eigen::Index>(i)] -
                              lam_next * seg.d[static_cast<Eigen::Index>(i)];
        }

        SupportSet support = path.supports_after.back();
        if (best.is_drop) {
            beta[best.variable] = 0.0;  // crosses zero exactly at the knot
            active.erase(active.begin() + best.active_pos);
            signs.erase(signs.begin() + best.active_pos);
            is_active[static_cast<std::size_t>(best.variable)] = false;
            support.erase(best.variable);
            path.events.push_back({step, EventKind::Drop, best.variable, lam_next});
        } else {
            active.push_back(best.variable);
            signs.push_back(best.sign);
            is_active[static_cast<std::size_t>(best.variable)] = true;
            support.insert(best.variable);
            path.events.push_back({step, EventKind::Add, best.variable, lam_next});
        }
        path.knot_solutions.push_back(std::move(beta));
        path.supports_after.push_back(std::move(support));
        lam_cur = lam_next;
    }

    // Active-set cap reached: close with the final segment. Its validity floor is
    // the largest zero-crossing among active coefficients (none is expected in
    // the common full-rank p <= n-1 case).
    Segment seg = solve_segment(X, y, active, signs, path.steps());
    path.has_tail = true;
    path.tail_floor = 0.0;
    path.tail_u = Eigen::VectorXd::Zero(p);
    path.tail_d = Eigen::VectorXd::Zero(p);
    for (std::size_t i = 0; i < active.size(); ++i) {
        path.tail_u[active[i]] = seg.u[static_cast<Eigen::Index>(i)];
        path.tail_d[active[i]] = seg.d[static_cast<Eigen::Index>(i)];
        const double di = seg.d[static_cast<Eigen::Index>(i)];
        if (std::abs(di) > kTieTol) {
            const double lam = seg.u[static_cast<Eigen::Index>(i)] / di;
            if (lam > kTieTol && lam < lam_cur - kTieTol) {
                path.tail_floor = std::max(path.tail_floor, lam);
            }
        }
    }
    return path;
}

SupportSet support_at_step(const SolutionPath& path, int k) {
    if (k < 1 || k > path.steps()) {
        throw ParameterError("support_at_step: step " + std::to_string(k) +
                             " outside 1.." + std::to_string(path.steps()));
    }
    return path.supports_after[static_cast<std::size_t>(k) - 1];
}

Eigen::VectorXd coefficients_at(const SolutionPath& path, double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw ParameterError("coefficients_at: lambda must be finite and non-negative");
    }
    if (path.events.empty()) {
        return Eigen::VectorXd::Zero(path.p);
    }
    if (lambda >= path.events.front().knot) {
        return Eigen::VectorXd::Zero(path.p);
    }
    const double last = path.events.back().knot;
    if (lambda < last) {
        if (!path.has_tail || lambda < path.tail_floor) {
            throw ParameterError("coefficients_at: path truncated above lambda = " +
                                 format_g17(lambda));
        }
        return path.tail_u - lambda * path.tail_d;
    }
    // Find the segment [knot_{k+1}, knot_k] containing lambda; knots descend.
    std::size_t hi = 1;
    while (hi < path.events.size() && path.events[hi].knot > lambda) ++hi;
    // events[hi-1].knot >= lambda >= events[hi].knot (hi == size means lambda == last).
    if (hi == path.events.size()) {
        return path.knot_solutions.back();
    }
    const double lam_a = path.events[hi - 1].knot;
    const double lam_b = path.events[hi].knot;
    if (lam_a - lam_b <= kTieTol) {
        return path.knot_solutions[hi];
    }
    const double t = (lam_a - lambda) / (lam_a - lam_b);
    return path.knot_solutions[hi - 1] + t * (path.knot_solutions[hi] - path.knot_solutions[hi - 1]);
}

bool screened_at_size(const SolutionPath& path, const SupportSet& true_support, int s) {
    if (s < 0) throw ParameterError("screened_at_size: s must be >= 0");
    SupportSet seen;
    for (const PathEvent& ev : path.events) {
        if (seen.size() >= s) break;
        if (ev.kind != EventKind::Add) continue;
        if (!seen.contains(ev.variable)) seen.insert(ev.variable);
    }
    return seen.contains_all(true_support);
}

}  // namespace covlab
