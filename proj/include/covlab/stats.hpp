#pragma once

#include <Eigen/Core>

namespace covlab {

// Standard normal CDF, computed through erfc for accuracy in both tails.
double normal_cdf(double x);

// Inverse standard normal CDF (quantile function), rational approximation
// accurate to about 1e-15 over (0,1); used both for Gaussian sampling by
// inversion and for chi-squared(1) quantiles via the Z^2 identity.
// p outside (0,1) is a parameter error.
double inv_normal_cdf(double p);

enum class NullDist { Exp1, ChiSq1 };

// CDF of the reference null at x (mass below 0 is zero for both).
double null_cdf(double x, NullDist null);

// Quantile of the reference null: Exp(1) -> -log(1-q); ChiSq1 -> (Phi^{-1}((1+q)/2))^2.
// q outside (0,1) is a parameter error.
double null_quantile(double q, NullDist null);

// Two-sided Kolmogorov-Smirnov distance between the sample's empirical CDF and
// the reference null, evaluated with the standard step formula
//   D = max_i max( F(x_(i)) - (i-1)/m, i/m - F(x_(i)) ).
// Empty sample is a parameter error.
double ks_distance(const Eigen::VectorXd& sample, NullDist null);

}  // namespace covlab
