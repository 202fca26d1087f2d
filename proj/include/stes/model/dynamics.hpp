#pragma once

// Continuous-time dynamics of the storage/ground network, the battery and the
// electrical power balance.

#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/core/jet.hpp"
#include "stes/model/network.hpp"
#include "stes/model/params.hpp"

namespace stes::model {

/// Lorenz-efficiency COP for a source at `t_source` and a sink at `t_sink` (both degC).
inline double cop(double t_source, double eta_lorenz, double t_sink) {
  if (!(t_source < t_sink)) {
    throw DomainError("cop: source temperature " + std::to_string(t_source) + " degC is not below the sink (" +
                      std::to_string(t_sink) + " degC)");
  }
  return eta_lorenz * (t_sink + kKelvinOffset) / (t_sink - t_source);
}

inline double cop(double t_amb, const HeatPumpParams& hp) { return cop(t_amb, hp.eta_lorenz, hp.t_sink); }

/// Fixed data of one evaluation of the storage dynamics besides state and HP heat.
struct StorageForcing {
  double q_load = 0.0;  // W
  double t_amb = 0.0;   // degC
};

struct DynamicsConfig {
  double t_hp = 86.0;
  double spread = 20.0;
  double min_lift = 0.5;

  static DynamicsConfig from(const HeatPumpParams& hp, const OperatingLimits& lim) {
    return {hp.t_sink, lim.supply_return_spread, hp.min_lift_margin};
  }
};

namespace detail {

[[noreturn]] inline void throw_lift(double t_bottom, double t_hp, double margin) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "storage bottom temperature %.6g degC is within %.3g K of the heat-pump sink %.6g degC", t_bottom,
                margin, t_hp);
  throw DomainError(buf);
}

}  // namespace detail

/// Time derivatives (K/s) of storage layer and ground shell temperatures.
/// `x` holds T_s,1..M followed by T_g,1..N in degC.
template <class S>
void storage_rhs(std::span<const S> x, const S& q_hp, const StorageForcing& in, const ThermalNetworkT<S>& net,
                 const DynamicsConfig& cfg, std::span<S> dx) {
  const int M = net.storage_layers;
  const int N = net.ground_layers;
  const auto at = [](int i) { return static_cast<std::size_t>(i); };

  const S lift = S(cfg.t_hp) - x[at(M - 1)];
  if (!(ad::value_of(lift) >= cfg.min_lift)) detail::throw_lift(ad::value_of(x[at(M - 1)]), cfg.t_hp, cfg.min_lift);
  const S hp_flow = q_hp / lift;  // c_p * mdot_hp in W/K
  const double load_flow = in.q_load / cfg.spread;
  const S& tg1 = x[at(M)];

  S to_ground = S(0.0);
  for (int m = 0; m < M; ++m) {
    const S& tm = x[at(m)];
    const S up = m == 0 ? S(cfg.t_hp) : x[at(m - 1)];
    const S down = m == M - 1 ? x[0] - cfg.spread : x[at(m + 1)];
    S flow = hp_flow * (up - tm) + load_flow * (down - tm);
    if (m > 0) flow += net.g_eff[at(m - 1)] * (x[at(m - 1)] - tm);
    if (m < M - 1) flow += net.g_eff[at(m)] * (x[at(m + 1)] - tm);
    if (m == 0) flow += net.g_top * (in.t_amb - tm);
    const S wall = net.g_wall_ground[at(m)] * (tg1 - tm);
    flow += wall;
    to_ground -= wall;
    dx[at(m)] = flow / net.c_storage[at(m)];
  }
  for (int n = 0; n < N; ++n) {
    const S& tn = x[at(M + n)];
    S flow = n == 0 ? to_ground : net.g_ground[at(n - 1)] * (x[at(M + n - 1)] - tn);
    const S outer = n == N - 1 ? S(net.t_boundary) : x[at(M + n + 1)];
    flow += net.g_ground[at(n)] * (outer - tn);
    dx[at(M + n)] = flow / net.c_ground[at(n)];
  }
}

template <class S>
std::vector<S> storage_rhs(const std::vector<S>& x, const S& q_hp, const StorageForcing& in,
                           const ThermalNetworkT<S>& net, const DynamicsConfig& cfg) {
  std::vector<S> dx(x.size());
  storage_rhs<S>(std::span<const S>(x), q_hp, in, net, cfg, std::span<S>(dx));
  return dx;
}

/// Sparse entries (row, col, value) of d(storage_rhs)/dx together with d/dq_hp.
struct RhsJacobian {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> values;
  std::vector<double> d_qhp;

  void clear() {
    rows.clear();
    cols.clear();
    values.clear();
    d_qhp.clear();
  }
  void add(int r, int c, double v) {
    rows.push_back(r);
    cols.push_back(c);
    values.push_back(v);
  }
};

/// Analytic Jacobian of `storage_rhs` with respect to the temperatures. Entries
/// may repeat (duplicates are to be summed); the pattern depends only on M and N.
inline void storage_jacobian(std::span<const double> x, double q_hp, const StorageForcing& in,
                             const ThermalNetwork& net, const DynamicsConfig& cfg, RhsJacobian& jac) {
  const int M = net.storage_layers;
  const int N = net.ground_layers;
  const auto at = [](int i) { return static_cast<std::size_t>(i); };
  jac.clear();
  jac.d_qhp.assign(x.size(), 0.0);

  const double lift = cfg.t_hp - x[at(M - 1)];
  if (!(lift >= cfg.min_lift)) detail::throw_lift(x[at(M - 1)], cfg.t_hp, cfg.min_lift);
  const double hp_flow = q_hp / lift;
  const double d_hp_flow = q_hp / (lift * lift);  // d(hp_flow)/dT_s,M
  const double load_flow = in.q_load / cfg.spread;

  double ground_diag = 0.0;
  for (int m = 0; m < M; ++m) {
    const double ic = 1.0 / net.c_storage[at(m)];
    const double up = m == 0 ? cfg.t_hp : x[at(m - 1)];
    double diag = -hp_flow - load_flow - net.g_wall_ground[at(m)];
    if (m > 0) {
      diag -= net.g_eff[at(m - 1)];
      jac.add(m, m - 1, (hp_flow + net.g_eff[at(m - 1)]) * ic);
    }
    if (m < M - 1) {
      diag -= net.g_eff[at(m)];
      jac.add(m, m + 1, (load_flow + net.g_eff[at(m)]) * ic);
    } else {
      jac.add(m, 0, load_flow * ic);
    }
    if (m == 0) diag -= net.g_top;
    jac.add(m, m, diag * ic);
    jac.add(m, M - 1, (up - x[at(m)]) * d_hp_flow * ic);
    jac.add(m, M, net.g_wall_ground[at(m)] * ic);
    jac.d_qhp[at(m)] = (up - x[at(m)]) / lift * ic;

    const double icg = 1.0 / net.c_ground[0];
    jac.add(M, m, net.g_wall_ground[at(m)] * icg);
    ground_diag -= net.g_wall_ground[at(m)];
  }
  for (int n = 0; n < N; ++n) {
    const double icg = 1.0 / net.c_ground[at(n)];
    double diag = n == 0 ? ground_diag : 0.0;
    if (n > 0) {
      diag -= net.g_ground[at(n - 1)];
      jac.add(M + n, M + n - 1, net.g_ground[at(n - 1)] * icg);
    }
    diag -= net.g_ground[at(n)];
    if (n < N - 1) jac.add(M + n, M + n + 1, net.g_ground[at(n)] * icg);
    jac.add(M + n, M + n, diag * icg);
  }
}

/// Heat flows (W) across the network boundary; used for energy audits.
struct BoundaryFlows {
  double hp_in = 0.0;
  double load_out = 0.0;
  double top_loss = 0.0;       // to ambient through the lid
  double boundary_loss = 0.0;  // through the outermost ground shell
  double storage_to_ground = 0.0;

  double net_gain() const { return hp_in - load_out - top_loss - boundary_loss; }
};

inline BoundaryFlows boundary_flows(std::span<const double> x, double q_hp, const StorageForcing& in,
                                    const ThermalNetwork& net) {
  const int M = net.storage_layers;
  const int N = net.ground_layers;
  BoundaryFlows f;
  f.hp_in = q_hp;
  f.load_out = in.q_load;
  f.top_loss = net.g_top * (x[0] - in.t_amb);
  f.boundary_loss = net.g_ground.back() * (x[static_cast<std::size_t>(M + N - 1)] - net.t_boundary);
  for (int m = 0; m < M; ++m) {
    f.storage_to_ground +=
        net.g_wall_ground[static_cast<std::size_t>(m)] * (x[static_cast<std::size_t>(m)] - x[static_cast<std::size_t>(M)]);
  }
  return f;
}

/// Heat held in the network relative to 0 degC (J).
inline double stored_heat(std::span<const double> x, const ThermalNetwork& net) {
  const std::size_t M = net.c_storage.size();
  double e = 0.0;
  for (std::size_t m = 0; m < M; ++m) e += net.c_storage[m] * x[m];
  for (std::size_t n = 0; n < net.c_ground.size(); ++n) e += net.c_ground[n] * x[M + n];
  return e;
}

/// d(soc)/dt in 1/s.
inline double battery_dynamics(const ControlVector& u, const BatteryParams& bp, const DesignVector& design) {
  const double cap_j = design.s_b * bp.capacity_wh * 3600.0;
  if (!(cap_j > 0.0)) throw DomainError("battery capacity must be positive");
  return (u.p_b_plus * bp.eta_ch - u.p_b_minus / bp.eta_dis) / cap_j;
}

/// Left-hand side of the electrical balance; zero for a feasible operating point.
inline double power_balance_residual(const ControlVector& u, double p_re, double p_load) {
  return p_re - p_load - u.p_hp - (u.p_b_plus - u.p_b_minus) + (u.p_grid_plus - u.p_grid_minus);
}

}  // namespace stes::model
