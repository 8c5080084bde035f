#pragma once

#include <vector>

#include <Eigen/Core>

#include "covlab/dataset.hpp"

namespace covlab {

enum class EventKind { Add, Drop };

// One knot of the piecewise-linear path: at lambda = knot, `variable` either
// joins the active set (Add) or its coefficient hits zero and leaves (Drop).
struct PathEvent {
    int step = 0;  // 1-based; drops count as steps
    EventKind kind = EventKind::Add;
    int variable = -1;
    double knot = 0.0;
};

// Exact Lasso solution path for (2n)^{-1} ||y - X b||^2 + lambda ||b||_1.
// Between consecutive knots the solution is affine in lambda, so the stored
// knot solutions determine the whole path by interpolation.
struct SolutionPath {
    int n = 0;
    int p = 0;
    std::vector<PathEvent> events;
    // Coefficient vector at each event's knot (same indexing as events).
    std::vector<Eigen::VectorXd> knot_solutions;
    // Active set immediately after each event.
    std::vector<SupportSet> supports_after;

    // Closed tail below the last knot: beta(lambda) = tail_u - lambda * tail_d on
    // the final active set, valid for lambda in [tail_floor, last knot]. Present
    // only when the path terminated by exhausting candidates or hitting the
    // active-set cap (not when truncated by max_steps).
    bool has_tail = false;
    double tail_floor = 0.0;
    Eigen::VectorXd tail_u;  // length p, embedded
    Eigen::VectorXd tail_d;

    double knot(int k) const { return events[static_cast<std::size_t>(k) - 1].knot; }
    int steps() const { return static_cast<int>(events.size()); }
};

// LARS with the lasso modification (drop events when an active coefficient
// crosses zero). Stops after max_steps events, when no event remains above
// lambda = 0, or when the active set reaches min(n-1, p). Requires columns
// scaled to ||x_j||^2 = n.
SolutionPath lars_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_steps);

// Active set immediately after event k (1-based).
SupportSet support_at_step(const SolutionPath& path, int k);

// Exact path solution at the given lambda (<= first knot; larger values return
// zero). Throws if the path was truncated above that lambda.
Eigen::VectorXd coefficients_at(const SolutionPath& path, double lambda);

// True iff the first s distinct variables ever added along the path contain
// true_support.
bool screened_at_size(const SolutionPath& path, const SupportSet& true_support, int s);

}  // namespace covlab
