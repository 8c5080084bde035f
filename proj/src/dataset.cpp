#include "covlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "covlab/common.hpp"
#include "covlab/rng.hpp"

namespace covlab {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SupportSet::SupportSet(std::vector<int> indices) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

SupportSet SupportSet::from_nonzeros(const Eigen::VectorXd& beta) {
    SupportSet s;
    for (int j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) s.indices_.push_back(j);
    }
    return s;
}

bool SupportSet::contains(int j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

void SupportSet::insert(int j) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), j);
    if (it == indices_.end() || *it != j) indices_.insert(it, j);
}

void SupportSet::erase(int j) {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), j);
    if (it != indices_.end() && *it == j) indices_.erase(it);
}

bool SupportSet::contains_all(const SupportSet& other) const {
    return std::includes(indices_.begin(), indices_.end(),
                         other.indices_.begin(), other.indices_.end());
}

Eigen::MatrixXd generate_design(int n, int p, double rho, std::uint64_t seed) {
    if (n < 2 || p < 1) {
        throw ParameterError("generate_design: need n >= 2 and p >= 1");
    }
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0) {
        throw ParameterError("generate_design: rho must be finite and in [0,1)");
    }
    Rng rng(derive_stream(seed, "design", 0));
    Eigen::MatrixXd X(n, p);
    const double w = std::sqrt(1.0 - rho * rho);
    // Row-major draw order so the stream layout is independent of storage order.
    for (int i = 0; i < n; ++i) {
        double prev = 0.0;
        for (int j = 0; j < p; ++j) {
            const double z = rng.normal();
            const double x = (j == 0) ? z : rho * prev + w * z;
            X(i, j) = x;
            prev = x;
        }
    }
    return X;
}

Eigen::VectorXd generate_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta_star,
                                  double sigma, std::uint64_t seed) {
    if (beta_star.size() != X.cols()) {
        throw ParameterError("generate_response: beta_star length must equal the column count");
    }
    if (!std::isfinite(sigma) || sigma < 0.0) {
        throw ParameterError("generate_response: sigma must be finite and non-negative");
    }
    Rng rng(derive_stream(seed, "noise", 0));
    Eigen::VectorXd y = X * beta_star;
    for (int i = 0; i < y.size(); ++i) {
        y[i] += sigma * rng.normal();
    }
    return y;
}

Eigen::VectorXd reference_beta_star(int p) {
    if (p < 7) {
        throw ParameterError("reference_beta_star: need p >= 7");
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    b[0] = 1.0;
    b[1] = -0.5;
    b[2] = 0.7;
    b[3] = -1.2;
    b[4] = -0.9;
    b[5] = 0.3;
    b[6] = 0.55;
    return b;
}

Dataset standardize(Dataset ds) {
    const int n = ds.n();
    const int p = ds.p();
    ds.col_center.resize(p);
    ds.col_scale.resize(p);
    for (int j = 0; j < p; ++j) {
        const double mean = ds.X.col(j).mean();
        ds.X.col(j).array() -= mean;
        const double norm2 = ds.X.col(j).squaredNorm();
        if (norm2 <= 0.0) {
            throw ContractError("standardize: column " + std::to_string(j) + " is constant");
        }
        const double scale = std::sqrt(norm2 / n);
        ds.X.col(j) /= scale;
        ds.col_center[j] = mean;
        ds.col_scale[j] = scale;
    }
    ds.y_center = ds.y.mean();
    ds.y.array() -= ds.y_center;
    ds.standardized = true;
    return ds;
}

Dataset orthonormalize(Dataset ds) {
    const int n = ds.n();
    const int p = ds.p();
    if (n < p) {
        throw ContractError("orthonormalize: requires n >= p");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ds.X);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    // Fix the sign ambiguity (R_jj > 0) so the result is deterministic and each
    // column keeps a positive projection onto the original one.
    Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j) {
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
        if (std::abs(R(j, j)) <= 0.0) {
            throw ContractError("orthonormalize: rank-deficient design at column " +
                                std::to_string(j));
        }
    }
    ds.X = std::sqrt(static_cast<double>(n)) * Q;
    ds.col_center = Eigen::VectorXd::Zero(p);
    ds.col_scale = Eigen::VectorXd::Ones(p);
    ds.y_center = 0.0;
    ds.standardized = true;
    return ds;
}

void save_design_csv(const Eigen::MatrixXd& X, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_design_csv: cannot open " + path);
    for (int j = 0; j < X.cols(); ++j) {
        out << (j ? "," : "") << "x" << (j + 1);
    }
    out << "\n";
    for (int i = 0; i < X.rows(); ++i) {
        for (int j = 0; j < X.cols(); ++j) {
            out << (j ? "," : "") << format_g17(X(i, j));
        }
        out << "\n";
    }
    if (!out) throw Error("save_design_csv: write failed for " + path);
}

void save_response_csv(const Eigen::VectorXd& y, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_response_csv: cannot open " + path);
    for (int i = 0; i < y.size(); ++i) {
        out << format_g17(y[i]) << "\n";
    }
    if (!out) throw Error("save_response_csv: write failed for " + path);
}

Eigen::MatrixXd load_design_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("load_design_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParameterError("load_design_csv: empty file " + path);
    }
    std::stringstream header(line);
    std::string cell;
    int p = 0;
    while (std::getline(header, cell, ',')) {
        ++p;
        if (cell != "x" + std::to_string(p)) {
            throw ParameterError("load_design_csv: expected header x1..xp, got '" + cell +
                                 "' at column " + std::to_string(p));
        }
    }
    if (p == 0) throw ParameterError("load_design_csv: no columns in " + path);
    std::vector<double> values;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        int got = 0;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParameterError("load_design_csv: unparseable value '" + cell + "' at row " +
                                     std::to_string(rows + 2));
            }
            ++got;
        }
        if (got != p) {
            throw ParameterError("load_design_csv: row " + std::to_string(rows + 2) + " has " +
                                 std::to_string(got) + " fields, expected " + std::to_string(p));
        }
        ++rows;
    }
    Eigen::MatrixXd X(rows, p);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < p; ++j) {
            X(i, j) = values[static_cast<std::size_t>(i) * p + j];
        }
    }
    return X;
}

Eigen::VectorXd load_response_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("load_response_csv: cannot open " + path);
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ParameterError("load_response_csv: unparseable value '" + line + "' at line " +
                                 std::to_string(lineno));
        }
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace covlab
