#pragma once

// Implicit Euler time stepping of the storage/ground network, an explicit RK4
// reference integrator, annual simulation and year-periodic steady states.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/model/dynamics.hpp"
#include "stes/model/system.hpp"

namespace stes::sim {

using model::BoundaryFlows;
using model::DynamicsConfig;
using model::StorageForcing;
using model::ThermalNetwork;

struct NewtonOptions {
  double tol = 1e-10;          // on max |residual| / 100 K
  int max_iterations = 50;
  int max_halvings = 8;
  /// Systems up to this size are factorized densely.
  int dense_limit = 48;
};

/// Piecewise-constant data of one interval.
struct IntervalInput {
  double q_hp = 0.0;    // W thermal
  double q_load = 0.0;  // W
  double t_amb = 0.0;   // degC
  double p_b_plus = 0.0;
  double p_b_minus = 0.0;
};

class ThermalStepper {
 public:
  ThermalStepper(ThermalNetwork net, DynamicsConfig cfg, NewtonOptions opts = {})
      : net_(std::move(net)), cfg_(cfg), opts_(opts), n_(net_.storage_layers + net_.ground_layers) {}

  const ThermalNetwork& network() const { return net_; }
  const DynamicsConfig& config() const { return cfg_; }
  int size() const { return n_; }
  int last_iterations() const { return last_iterations_; }

  /// Solves y - x - h f(y) = 0 for the state y after one implicit Euler step.
  std::vector<double> step(std::span<const double> x, double q_hp, const StorageForcing& in, double h) {
    std::vector<double> y(x.begin(), x.end());
    std::vector<double> r(static_cast<std::size_t>(n_)), f(static_cast<std::size_t>(n_));
    double norm = residual(x, y, q_hp, in, h, r, f);
    if (!std::isfinite(norm)) throw DomainError("implicit Euler: dynamics undefined at the initial state");
    std::vector<double> trial(y.size()), r_trial(y.size());
    for (int it = 0; it < opts_.max_iterations; ++it) {
      if (norm <= opts_.tol) {
        last_iterations_ = it;
        return y;
      }
      const Eigen::VectorXd delta = newton_direction(y, q_hp, in, h, r);
      double alpha = 1.0;
      double trial_norm = INFINITY;
      for (int k = 0; k <= opts_.max_halvings; ++k) {
        for (std::size_t i = 0; i < y.size(); ++i) trial[i] = y[i] + alpha * delta(static_cast<Eigen::Index>(i));
        trial_norm = residual(x, trial, q_hp, in, h, r_trial, f);
        if (trial_norm < norm) break;
        if (k < opts_.max_halvings) alpha *= 0.5;
      }
      if (!std::isfinite(trial_norm)) break;
      y.swap(trial);
      r.swap(r_trial);
      norm = trial_norm;
    }
    if (norm <= opts_.tol) {
      last_iterations_ = opts_.max_iterations;
      return y;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "implicit Euler: Newton did not converge in %d iterations (residual %.3e K)",
                  opts_.max_iterations, 100.0 * norm);
    throw ConvergenceError(buf);
  }

 private:
  // Returns max |y - x - h f(y)| / 100, or +inf when f is undefined at y.
  double residual(std::span<const double> x, const std::vector<double>& y, double q_hp, const StorageForcing& in,
                  double h, std::vector<double>& r, std::vector<double>& f) const {
    try {
      model::storage_rhs<double>(std::span<const double>(y), q_hp, in, net_, cfg_, std::span<double>(f));
    } catch (const DomainError&) {
      return INFINITY;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      r[i] = y[i] - x[i] - h * f[i];
      m = std::max(m, std::abs(r[i]));
    }
    return m / 100.0;
  }

  Eigen::VectorXd newton_direction(const std::vector<double>& y, double q_hp, const StorageForcing& in, double h,
                                   const std::vector<double>& r) {
    model::storage_jacobian(y, q_hp, in, net_, cfg_, jac_);
    Eigen::VectorXd rhs(n_);
    for (int i = 0; i < n_; ++i) rhs(i) = -r[static_cast<std::size_t>(i)];
    if (n_ <= opts_.dense_limit) {
      Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n_, n_);
      for (std::size_t k = 0; k < jac_.values.size(); ++k) A(jac_.rows[k], jac_.cols[k]) -= h * jac_.values[k];
      return A.partialPivLu().solve(rhs);
    }
    triplets_.clear();
    for (int i = 0; i < n_; ++i) triplets_.emplace_back(i, i, 1.0);
    for (std::size_t k = 0; k < jac_.values.size(); ++k) triplets_.emplace_back(jac_.rows[k], jac_.cols[k], -h * jac_.values[k]);
    Eigen::SparseMatrix<double> A(n_, n_);
    A.setFromTriplets(triplets_.begin(), triplets_.end());
    if (!analyzed_) {
      lu_.analyzePattern(A);
      analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success) throw ConvergenceError("implicit Euler: singular Newton matrix");
    return lu_.solve(rhs);
  }

  ThermalNetwork net_;
  DynamicsConfig cfg_;
  NewtonOptions opts_;
  int n_;
  int last_iterations_ = 0;
  model::RhsJacobian jac_;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

/// One classical RK4 step of the storage dynamics.
inline std::vector<double> rk4_step(std::span<const double> x, double q_hp, const StorageForcing& in, double h,
                                    const ThermalNetwork& net, const DynamicsConfig& cfg) {
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto f = [&](const std::vector<double>& y, std::vector<double>& out) {
    model::storage_rhs<double>(std::span<const double>(y), q_hp, in, net, cfg, std::span<double>(out));
  };
  std::vector<double> y(x.begin(), x.end());
  f(y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  f(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  f(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
  f(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return y;
}

inline constexpr double kSanityMin = -60.0;
inline constexpr double kSanityMax = 120.0;

struct Trajectory {
  double h = 3600.0;
  std::vector<double> times;                // node times (s), one more than intervals
  std::vector<model::SystemState> states;   // per node
  std::vector<IntervalInput> inputs;        // per interval
  std::vector<BoundaryFlows> flows;         // per interval, averaged over the interval

  std::size_t intervals() const { return inputs.size(); }

  /// Series of one thermal state (index into T_s then T_g) over all nodes.
  std::vector<double> thermal_series(std::size_t index) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(index < s.t_storage.size() ? s.t_storage[index] : s.t_ground[index - s.t_storage.size()]);
    return out;
  }
};

namespace detail {

inline std::string interval_prefix(std::size_t k) { return "interval " + std::to_string(k) + ": "; }

inline void check_sanity(const std::vector<double>& x, std::size_t k) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= kSanityMin && x[i] <= kSanityMax)) {
      throw DomainError(interval_prefix(k) + "temperature state " + std::to_string(i) + " left the sanity band (" +
                        std::to_string(x[i]) + " degC)");
    }
  }
}

}  // namespace detail

/// Chains implicit Euler steps (each interval split into `substeps` equal steps
/// with the interval's inputs held constant).
inline Trajectory simulate(ThermalStepper& stepper, const model::SystemState& x0, const std::vector<IntervalInput>& inputs,
                           double h, int substeps = 1, const model::BatteryParams* battery = nullptr,
                           double battery_scale = 1.0) {
  if (!(h > 0.0) || substeps < 1) throw ConfigError("simulate: step must be positive");
  Trajectory tr;
  tr.h = h;
  tr.inputs = inputs;
  tr.states.reserve(inputs.size() + 1);
  tr.times.reserve(inputs.size() + 1);
  tr.flows.reserve(inputs.size());
  tr.states.push_back(x0);
  tr.times.push_back(0.0);
  model::SystemState cur = x0;
  std::vector<double> x = x0.thermal();
  const double hs = h / substeps;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& in = inputs[k];
    const StorageForcing forcing{in.q_load, in.t_amb};
    BoundaryFlows avg;
    try {
      for (int s = 0; s < substeps; ++s) {
        x = stepper.step(x, in.q_hp, forcing, hs);
        const auto f = model::boundary_flows(x, in.q_hp, forcing, stepper.network());
        avg.hp_in += f.hp_in / substeps;
        avg.load_out += f.load_out / substeps;
        avg.top_loss += f.top_loss / substeps;
        avg.boundary_loss += f.boundary_loss / substeps;
        avg.storage_to_ground += f.storage_to_ground / substeps;
      }
    } catch (const DomainError& e) {
      throw DomainError(detail::interval_prefix(k) + e.what());
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(detail::interval_prefix(k) + e.what());
    }
    detail::check_sanity(x, k);
    cur.set_thermal(x);
    if (battery != nullptr && battery_scale > 0.0) {
      model::ControlVector u;
      u.p_b_plus = in.p_b_plus;
      u.p_b_minus = in.p_b_minus;
      model::DesignVector d;
      d.s_b = battery_scale;
      cur.soc += h * model::battery_dynamics(u, *battery, d);
    }
    tr.states.push_back(cur);
    tr.times.push_back(h * static_cast<double>(k + 1));
    tr.flows.push_back(avg);
  }
  return tr;
}

/// Explicit RK4 reference with `substeps` steps per interval; returns thermal states per node.
inline std::vector<std::vector<double>> simulate_rk4(const ThermalNetwork& net, const DynamicsConfig& cfg,
                                                     const std::vector<double>& x0,
                                                     const std::vector<IntervalInput>& inputs, double h, int substeps) {
  std::vector<std::vector<double>> out;
  out.reserve(inputs.size() + 1);
  out.push_back(x0);
  std::vector<double> x = x0;
  const double hs = h / substeps;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const StorageForcing forcing{inputs[k].q_load, inputs[k].t_amb};
    try {
      for (int s = 0; s < substeps; ++s) x = rk4_step(x, inputs[k].q_hp, forcing, hs, net, cfg);
    } catch (const DomainError& e) {
      throw DomainError(detail::interval_prefix(k) + e.what());
    }
    detail::check_sanity(x, k);
    out.push_back(x);
  }
  return out;
}

/// Annual energy audit: change of stored heat against the integrated boundary flows.
struct EnergyAudit {
  double stored_change = 0.0;   // J
  double integrated_gain = 0.0; // J
  double hp_in = 0.0;           // J
  double load_out = 0.0;        // J
  double losses = 0.0;          // J

  double relative_error() const {
    const double scale = std::max({std::abs(hp_in), std::abs(load_out), std::abs(losses), 1.0});
    return std::abs(stored_change - integrated_gain) / scale;
  }
};

inline EnergyAudit energy_audit(const Trajectory& tr, const ThermalNetwork& net) {
  EnergyAudit a;
  const auto x0 = tr.states.front().thermal();
  const auto x1 = tr.states.back().thermal();
  a.stored_change = model::stored_heat(x1, net) - model::stored_heat(x0, net);
  for (const auto& f : tr.flows) {
    a.integrated_gain += tr.h * f.net_gain();
    a.hp_in += tr.h * f.hp_in;
    a.load_out += tr.h * f.load_out;
    a.losses += tr.h * (f.top_loss + f.boundary_loss);
  }
  return a;
}

struct PeriodicResult {
  model::SystemState state;
  int years = 0;
  double mismatch = 0.0;  // max |x(0) - x(end)| in K
};

/// Picard iteration x0 <- x(end of year) on the thermal states until the
/// year-over-year change is below `tol` (K). The state of charge is carried as given.
inline PeriodicResult periodic_steady_state(ThermalStepper& stepper, const model::SystemState& guess,
                                            const std::vector<IntervalInput>& inputs, double h, double tol = 1e-3,
                                            int max_years = 100) {
  if (!(tol > 0.0)) throw ConfigError("periodic_steady_state: tol must be positive");
  PeriodicResult res{guess, 0, INFINITY};
  std::vector<double> x = guess.thermal();
  for (int year = 1; year <= max_years; ++year) {
    const std::vector<double> start = x;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      try {
        x = stepper.step(x, inputs[k].q_hp, {inputs[k].q_load, inputs[k].t_amb}, h);
      } catch (const DomainError& e) {
        throw DomainError("year " + std::to_string(year) + ", " + detail::interval_prefix(k) + e.what());
      }
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) diff = std::max(diff, std::abs(x[i] - start[i]));
    res.years = year;
    res.mismatch = diff;
    res.state.set_thermal(x);
    if (diff <= tol) return res;
  }
  throw ConvergenceError("periodic_steady_state: no convergence after " + std::to_string(max_years) +
                         " years (last change " + std::to_string(res.mismatch) + " K)");
}

}  // namespace stes::sim
