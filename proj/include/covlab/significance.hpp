#pragma once

#include <Eigen/Core>

#include "covlab/lasso_path.hpp"
#include "covlab/solvers.hpp"
#include "covlab/stats.hpp"

namespace covlab {

// One covariance-test evaluation: the drop in penalized fit when the tested
// variable is withheld, scaled by 1/sigma^2, with reference-null p-values.
struct CovTestResult {
    int k = 0;             // step / entry index the test refers to
    int variable = -1;     // tested column
    double c = 1.0;        // refit level multiplier in [0,1]
    double lambda_next = 0.0;
    double statistic = 0.0;
    double p_exp1 = 1.0;
    double p_chisq1 = 1.0;
    double sigma2 = 1.0;
};

// Reference-null p-value: Exp(1) survival exp(-max(s,0)); chi-squared(1)
// survival 2(1 - Phi(sqrt(max(s,0)))).
double p_value(double statistic, NullDist null);

// Covariance test for the variable entering at step k of the Lasso path:
//   T = ( <y, X bhat(c*lam_{k+1})> - <y, X_A btilde_A(c*lam_{k+1})> ) / sigma2
// with both refits lasso-constrained on A u {j} and A. Step k must be an Add
// and event k+1 must exist.
CovTestResult covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const SolutionPath& path, int k, double c, double sigma2);

// Same contrast with the null support A_ell = (A u {j}) \ {ell}: significance of
// the active covariate ell given all other active covariates at step k.
CovTestResult conditional_covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                               const SolutionPath& path, int k, int ell, double c,
                                               double sigma2);

// Generalized statistic on the combined-regularization path: refits minimize
// the combined objective at penalty (c*lambda0, c*lambda_{k+1}, a), where
// lambda_{k+1} is the grid value at the next path event (or the next grid
// point when no later event exists).
CovTestResult combined_covariance_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const CombinedPath& cpath, int k, double c,
                                            double sigma2);

}  // namespace covlab
