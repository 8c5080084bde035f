#include "covlab/significance.hpp"

#include <cmath>
#include <string>

#include "covlab/common.hpp"

namespace covlab {

double p_value(double statistic, NullDist null) {
    if (!std::isfinite(statistic)) {
        throw ParameterError("p_value: statistic must be finite");
    }
    const double s = std::max(statistic, 0.0);
    switch (null) {
        case NullDist::Exp1:
            return std::exp(-s);
        case NullDist::ChiSq1:
            return std::erfc(std::sqrt(s / 2.0));
    }
    return 1.0;
}

namespace {

void validate_test_args(double c, double sigma2, const char* who) {
    if (!(c >= 0.0 && c <= 1.0)) {
        throw ParameterError(std::string(who) + ": c must lie in [0,1]");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw ParameterError(std::string(who) + ": sigma2 must be positive and finite");
    }
}

CovTestResult fill_result(int k, int variable, double c, double lambda_next, double statistic,
                          double sigma2) {
    CovTestResult res;
    res.k = k;
    res.variable = variable;
    res.c = c;
    res.lambda_next = lambda_next;
    res.statistic = statistic;
    res.p_exp1 = p_value(statistic, NullDist::Exp1);
    res.p_chisq1 = p_value(statistic, NullDist::ChiSq1);
    res.sigma2 = sigma2;
    return res;
}

}  // namespace

CovTestResult covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const SolutionPath& path, int k, double c, double sigma2) {
    validate_test_args(c, sigma2, "covariance_statistic");
    if (k < 1 || k > path.steps()) {
        throw ParameterError("covariance_statistic: no event " + std::to_string(k) +
                             " on a path with " + std::to_string(path.steps()) + " steps");
    }
    const PathEvent& ev = path.events[static_cast<std::size_t>(k) - 1];
    if (ev.kind != EventKind::Add) {
        throw ParameterError("covariance_statistic: event " + std::to_string(k) +
                             " is a drop; the test applies to entering variables");
    }
    if (k + 1 > path.steps()) {
        throw ParameterError("covariance_statistic: needs the next knot, but event " +
                             std::to_string(k + 1) + " is missing (path ended or truncated)");
    }
    const int j = ev.variable;
    SupportSet A = (k >= 2) ? path.supports_after[static_cast<std::size_t>(k) - 2] : SupportSet{};
    SupportSet Aj = A;
    Aj.insert(j);
    const double lambda_next = path.knot(k + 1);
    const double lam = c * lambda_next;
    const CoefficientVector with_j = constrained_lasso(X, y, Aj, lam);
    const CoefficientVector without_j = constrained_lasso(X, y, A, lam);
    const double stat = (y.dot(X * with_j.values) - y.dot(X * without_j.values)) / sigma2;
    return fill_result(k, j, c, lambda_next, stat, sigma2);
}

CovTestResult conditional_covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                               const SolutionPath& path, int k, int ell, double c,
                                               double sigma2) {
    validate_test_args(c, sigma2, "conditional_covariance_statistic");
    if (k < 1 || k > path.steps()) {
        throw ParameterError("conditional_covariance_statistic: no event " + std::to_string(k));
    }
    if (k + 1 > path.steps()) {
        throw ParameterError("conditional_covariance_statistic: needs the next knot, but event " +
                             std::to_string(k + 1) + " is missing");
    }
    const SupportSet active = path.supports_after[static_cast<std::size_t>(k) - 1];
    if (!active.contains(ell)) {
        throw ParameterError("conditional_covariance_statistic: variable " + std::to_string(ell) +
                             " is not active at step " + std::to_string(k));
    }
    SupportSet A_ell = active;
    A_ell.erase(ell);
    const double lambda_next = path.knot(k + 1);
    const double lam = c * lambda_next;
    const CoefficientVector full = constrained_lasso(X, y, active, lam);
    const CoefficientVector reduced = constrained_lasso(X, y, A_ell, lam);
    const double stat = (y.dot(X * full.values) - y.dot(X * reduced.values)) / sigma2;
    return fill_result(k, ell, c, lambda_next, stat, sigma2);
}

CovTestResult combined_covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const CombinedPath& cpath, int k, double c,
                                            double sigma2) {
    validate_test_args(c, sigma2, "combined_covariance_statistic");
    if (k < 1) throw ParameterError("combined_covariance_statistic: k must be >= 1");

    // Locate the k-th Add in event order, tracking the support just before it.
    SupportSet before;
    int entries = 0;
    std::size_t pos = 0;
    int j = -1;
    int grid_index = -1;
    for (; pos < cpath.events.size(); ++pos) {
        const CombinedPathEvent& ev = cpath.events[pos];
        if (ev.kind == EventKind::Add) {
            if (++entries == k) {
                j = ev.variable;
                grid_index = ev.grid_index;
                break;
            }
            before.insert(ev.variable);
        } else {
            before.erase(ev.variable);
        }
    }
    if (j < 0) {
        throw ParameterError("combined_covariance_statistic: only " + std::to_string(entries) +
                             " entry events on the path, need " + std::to_string(k));
    }

    double lambda_next;
    if (pos + 1 < cpath.events.size()) {
        lambda_next = cpath.grid[static_cast<std::size_t>(cpath.events[pos + 1].grid_index)];
    } else if (static_cast<std::size_t>(grid_index) + 1 < cpath.grid.size()) {
        lambda_next = cpath.grid[static_cast<std::size_t>(grid_index) + 1];
    } else {
        throw ParameterError("combined_covariance_statistic: entry " + std::to_string(k) +
                             " sits at the last grid point with no later event; no lambda_{k+1}");
    }

    SupportSet Aj = before;
    Aj.insert(j);
    const PenaltySpec pen{c * cpath.lambda0, c * lambda_next, cpath.a};
    const CoefficientVector with_j = constrained_combined(X, y, Aj, pen);
    const CoefficientVector without_j = constrained_combined(X, y, before, pen);
    const double stat = (y.dot(X * with_j.values) - y.dot(X * without_j.values)) / sigma2;
    return fill_result(k, j, c, lambda_next, stat, sigma2);
}

}  // namespace covlab
