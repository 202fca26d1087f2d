#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stes/transcribe/nlp.hpp"

namespace stes::solve {

/// Lagrangian L = f + lambda' g - z_l'(x - x_l) - z_u'(x_u - x).
struct Multipliers {
  std::vector<double> lambda;
  std::vector<double> z_lower;
  std::vector<double> z_upper;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;

  double max() const { return std::max({stationarity, primal, complementarity}); }
  bool within(double tol) const { return stationarity <= tol && primal <= tol && complementarity <= tol; }
};

/// Infinity-norm residuals of the first-order conditions, evaluated from scratch.
/// Inequality rows carry their bound multiplier in the sign of lambda.
inline KktResiduals kkt_report(const transcribe::SparseNlp& nlp, std::span<const double> x, const Multipliers& mult) {
  nlp.check_point(x);
  const auto n = static_cast<std::size_t>(nlp.n()), m = static_cast<std::size_t>(nlp.m());
  if (mult.lambda.size() != m || mult.z_lower.size() != n || mult.z_upper.size() != n) {
    throw DataError("multipliers do not match the problem dimensions");
  }
  const auto& xl = nlp.x_lower();
  const auto& xu = nlp.x_upper();
  const auto& gl = nlp.g_lower();
  const auto& gu = nlp.g_upper();

  std::vector<double> grad(n), g(m), jac(nlp.jac_nnz());
  nlp.gradient(x, grad);
  nlp.constraints(x, g);
  nlp.jacobian(x, jac);
  for (std::size_t p = 0; p < jac.size(); ++p) {
    grad[static_cast<std::size_t>(nlp.jac_cols()[p])] += jac[p] * mult.lambda[static_cast<std::size_t>(nlp.jac_rows()[p])];
  }

  KktResiduals r;
  auto up = [](double& acc, double v) { acc = std::max(acc, std::abs(v)); };
  for (std::size_t i = 0; i < n; ++i) {
    const double zl = mult.z_lower[i], zu = mult.z_upper[i];
    up(r.stationarity, grad[i] - zl + zu);
    if (zl < 0.0 || (!std::isfinite(xl[i]) && zl != 0.0)) up(r.stationarity, zl);
    if (zu < 0.0 || (!std::isfinite(xu[i]) && zu != 0.0)) up(r.stationarity, zu);
    up(r.primal, std::max({0.0, xl[i] - x[i], x[i] - xu[i]}));
    if (std::isfinite(xl[i])) up(r.complementarity, zl * (x[i] - xl[i]));
    if (std::isfinite(xu[i])) up(r.complementarity, zu * (xu[i] - x[i]));
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = mult.lambda[j];
    if (gl[j] == gu[j]) {
      up(r.primal, g[j] - gl[j]);
      continue;
    }
    up(r.primal, std::max({0.0, gl[j] - g[j], g[j] - gu[j]}));
    if (lam > 0.0) {
      if (std::isfinite(gu[j])) up(r.complementarity, lam * (gu[j] - g[j]));
      else up(r.stationarity, lam);
    } else if (lam < 0.0) {
      if (std::isfinite(gl[j])) up(r.complementarity, lam * (g[j] - gl[j]));
      else up(r.stationarity, lam);
    }
  }
  return r;
}

}  // namespace stes::solve
