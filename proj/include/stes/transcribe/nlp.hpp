#pragma once

// Problem interface shared by the transcription and the interior-point solver:
//   minimize f(x)  subject to  g_l <= g(x) <= g_u,  x_l <= x <= x_u.
// Derivatives are supplied as triplets over a pattern fixed at construction.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "stes/core/error.hpp"

namespace stes::transcribe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class SparseNlp {
 public:
  virtual ~SparseNlp() = default;

  int n() const { return static_cast<int>(x_lower_.size()); }
  int m() const { return static_cast<int>(g_lower_.size()); }

  const std::vector<double>& x_lower() const { return x_lower_; }
  const std::vector<double>& x_upper() const { return x_upper_; }
  const std::vector<double>& g_lower() const { return g_lower_; }
  const std::vector<double>& g_upper() const { return g_upper_; }

  const std::vector<int>& jac_rows() const { return jac_rows_; }
  const std::vector<int>& jac_cols() const { return jac_cols_; }
  /// Lower triangle (row >= col) of the Lagrangian Hessian.
  const std::vector<int>& hess_rows() const { return hess_rows_; }
  const std::vector<int>& hess_cols() const { return hess_cols_; }
  std::size_t jac_nnz() const { return jac_rows_.size(); }
  std::size_t hess_nnz() const { return hess_rows_.size(); }

  virtual double objective(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> grad) const = 0;
  virtual void constraints(std::span<const double> x, std::span<double> g) const = 0;
  virtual void jacobian(std::span<const double> x, std::span<double> values) const = 0;
  /// sigma * Hess f + sum_j lambda_j Hess g_j on the lower-triangle pattern.
  virtual void hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                       std::span<double> values) const = 0;

  virtual std::string variable_name(int i) const { return "x[" + std::to_string(i) + "]"; }
  virtual std::string constraint_name(int j) const { return "g[" + std::to_string(j) + "]"; }

  bool is_equality(int j) const {
    return g_lower_[static_cast<std::size_t>(j)] == g_upper_[static_cast<std::size_t>(j)];
  }

  void check_point(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n()) {
      throw DataError("point has " + std::to_string(x.size()) + " entries, problem has " + std::to_string(n()));
    }
  }

 protected:
  std::vector<double> x_lower_, x_upper_, g_lower_, g_upper_;
  std::vector<int> jac_rows_, jac_cols_, hess_rows_, hess_cols_;
};

/// Hourly fine grid and the coarse grid of the averaged problem.
struct GridSpec {
  int n_fine = 8760;
  double h_fine = 3600.0;
  int k = 24;

  int n_coarse() const { return n_fine / k; }
  double h_coarse() const { return h_fine * k; }
  double horizon() const { return h_fine * n_fine; }

  void validate(bool coarse) const {
    if (n_fine < 1) throw ConfigError("grid: need at least one fine interval");
    if (!(h_fine > 0.0)) throw ConfigError("grid: fine step must be positive");
    if (k < 1) throw ConfigError("grid: averaging window must be at least one interval");
    if (coarse && n_fine % k != 0) {
      throw ConfigError("inconsistent grid: " + std::to_string(k) + " does not divide " + std::to_string(n_fine));
    }
  }
};

}  // namespace stes::transcribe
