#pragma once

// Brute-force reference optimizers used only by tests. Deliberately independent
// of the library's solvers: plain grid scans with local refinement, no
// coordinate descent, no stationarity cubics.

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "covlab/solvers.hpp"

namespace oracles {

inline double combined_penalty_value(double b, const covlab::PenaltySpec& pen) {
    const double t = std::abs(b);
    return pen.lambda0 * t + pen.lambda * (pen.a + 1.0) * t / (pen.a + t);
}

inline double objective_2d(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double b0,
                           double b1, double lasso_lambda) {
    const double n = static_cast<double>(X.rows());
    const Eigen::VectorXd r = y - b0 * X.col(0) - b1 * X.col(1);
    return r.squaredNorm() / (2.0 * n) + lasso_lambda * (std::abs(b0) + std::abs(b1));
}

// 2-D lasso by grid search: coarse scan over a box, then repeated zooming.
// Final resolution ~1e-7, comfortably inside the 1e-4 comparison tolerance.
inline Eigen::Vector2d lasso_2d(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                double lambda) {
    const double n = static_cast<double>(X.rows());
    const double box = (X.transpose() * y / n).cwiseAbs().maxCoeff() + 1.0;
    double c0 = 0.0, c1 = 0.0, half = box;
    const int grid = 60;
    for (int round = 0; round < 12; ++round) {
        double best = std::numeric_limits<double>::infinity();
        double b0_best = c0, b1_best = c1;
        for (int i = -grid; i <= grid; ++i) {
            for (int j = -grid; j <= grid; ++j) {
                const double b0 = c0 + half * i / grid;
                const double b1 = c1 + half * j / grid;
                const double f = objective_2d(X, y, b0, b1, lambda);
                if (f < best) {
                    best = f;
                    b0_best = b0;
                    b1_best = b1;
                }
            }
        }
        c0 = b0_best;
        c1 = b1_best;
        half = 3.0 * half / grid;  // keep the refined box around the incumbent
    }
    return {c0, c1};
}

// 1-D minimizer of q(b) = 0.5 (b-z)^2 + lambda0|b| + p(|b|) by scan + zoom,
// always comparing against b = 0 (the penalty is singular there).
inline double scalar_min_1d(double z, const covlab::PenaltySpec& pen) {
    auto q = [&](double b) {
        const double d = b - z;
        return 0.5 * d * d + combined_penalty_value(b, pen);
    };
    double center = 0.0, half = std::abs(z) + 1.0;
    double b_best = 0.0, f_best = q(0.0);
    const int grid = 400;
    for (int round = 0; round < 10; ++round) {
        double local_best = f_best, local_b = b_best;
        for (int i = -grid; i <= grid; ++i) {
            const double b = center + half * i / grid;
            const double f = q(b);
            if (f < local_best) {
                local_best = f;
                local_b = b;
            }
        }
        b_best = local_b;
        f_best = local_best;
        center = local_b;
        half = 3.0 * half / grid;
    }
    return (f_best < q(0.0)) ? b_best : 0.0;
}

// Global minimizer of the 2-variable combined objective by support enumeration:
// the {0}, {1} branches reduce to scalar problems scanned directly on the data
// (not via scalar_min_1d's z-form), and the {0,1} branch is a 2-D grid scan.
inline Eigen::Vector2d combined_2d(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const covlab::PenaltySpec& pen) {
    const double n = static_cast<double>(X.rows());
    auto obj = [&](double b0, double b1) {
        const Eigen::VectorXd r = y - b0 * X.col(0) - b1 * X.col(1);
        return r.squaredNorm() / (2.0 * n) + combined_penalty_value(b0, pen) +
               combined_penalty_value(b1, pen);
    };
    const double box = (X.transpose() * y / n).cwiseAbs().maxCoeff() + 1.0;

    Eigen::Vector2d best_b(0.0, 0.0);
    double best = obj(0.0, 0.0);

    // Single-coordinate branches.
    for (int coord = 0; coord < 2; ++coord) {
        double center = 0.0, half = box;
        double b_loc = 0.0;
        double f_loc = best;
        const int grid = 800;
        for (int round = 0; round < 10; ++round) {
            for (int i = -grid; i <= grid; ++i) {
                const double b = center + half * i / grid;
                const double f = (coord == 0) ? obj(b, 0.0) : obj(0.0, b);
                if (f < f_loc) {
                    f_loc = f;
                    b_loc = b;
                }
            }
            center = b_loc;
            half = 3.0 * half / grid;
        }
        if (f_loc < best) {
            best = f_loc;
            best_b = (coord == 0) ? Eigen::Vector2d(b_loc, 0.0) : Eigen::Vector2d(0.0, b_loc);
        }
    }

    // Full-support branch: 2-D scan with zoom.
    {
        double c0 = 0.0, c1 = 0.0, half = box;
        double f_loc = best;
        Eigen::Vector2d b_loc = best_b;
        const int grid = 80;
        for (int round = 0; round < 12; ++round) {
            for (int i = -grid; i <= grid; ++i) {
                for (int j = -grid; j <= grid; ++j) {
                    const double b0 = c0 + half * i / grid;
                    const double b1 = c1 + half * j / grid;
                    const double f = obj(b0, b1);
                    if (f < f_loc) {
                        f_loc = f;
                        b_loc = {b0, b1};
                    }
                }
            }
            c0 = b_loc[0];
            c1 = b_loc[1];
            half = 3.0 * half / grid;
        }
        if (f_loc < best) {
            best = f_loc;
            best_b = b_loc;
        }
    }
    return best_b;
}

}  // namespace oracles
