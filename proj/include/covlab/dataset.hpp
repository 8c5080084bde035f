#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace covlab {

// Ordered set of active column indices. Kept strictly increasing; used for
// true supports, path supports, and refit constraint sets alike.
class SupportSet {
  public:
    SupportSet() = default;
    explicit SupportSet(std::vector<int> indices);

    static SupportSet from_nonzeros(const Eigen::VectorXd& beta);

    bool contains(int j) const;
    void insert(int j);   // no-op on duplicates
    void erase(int j);    // no-op on absent index
    bool contains_all(const SupportSet& other) const;

    int size() const { return static_cast<int>(indices_.size()); }
    bool empty() const { return indices_.empty(); }
    const std::vector<int>& indices() const { return indices_; }

    bool operator==(const SupportSet& other) const = default;

  private:
    std::vector<int> indices_;
};

// One simulated regression instance: y = X beta_star + eps. Immutable after
// construction; regenerating with the same parameters and seed is bit-identical.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd beta_star;
    double sigma = 0.0;
    double rho = 0.0;
    std::uint64_t seed = 0;
    bool standardized = false;

    // Populated by standardize() for mapping coefficients back to the raw scale.
    Eigen::VectorXd col_center;
    Eigen::VectorXd col_scale;
    double y_center = 0.0;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
};

// Rows i.i.d. N(0, Sigma) with Sigma_{ij} = rho^{|i-j|}, realized by the AR(1)
// recursion x_1 = z_1, x_j = rho x_{j-1} + sqrt(1-rho^2) z_j.
Eigen::MatrixXd generate_design(int n, int p, double rho, std::uint64_t seed);

// y = X beta_star + eps, eps ~ N(0, sigma^2), noise stream independent of the
// design stream for the same seed.
Eigen::VectorXd generate_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta_star,
                                  double sigma, std::uint64_t seed);

// The fixed 7-sparse coefficient vector used throughout the simulations,
// padded with zeros to length p (p >= 7 required).
Eigen::VectorXd reference_beta_star(int p);

// Center columns and rescale each to squared norm n; center y; record the
// transforms. Constant columns are an error.
Dataset standardize(Dataset dataset);

// Replace X's columns by an orthogonal set spanning the same space, scaled so
// X^T X = n I (requires n >= p). Columns are NOT centered: for n = p a centered
// column set has rank n-1 and could not be orthogonal. The standardized flag is
// set because every solver precondition only needs the common column scale.
Dataset orthonormalize(Dataset dataset);

// CSV pair interchange: X.csv is row-major with header x1..xp, y.csv is one
// unadorned column. 17 significant digits, lossless round-trip.
void save_design_csv(const Eigen::MatrixXd& X, const std::string& path);
void save_response_csv(const Eigen::VectorXd& y, const std::string& path);
Eigen::MatrixXd load_design_csv(const std::string& path);
Eigen::VectorXd load_response_csv(const std::string& path);

}  // namespace covlab
