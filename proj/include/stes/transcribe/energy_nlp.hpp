#pragma once

// Direct multiple-shooting transcription of the periodic design-and-dispatch
// problem. Two forms share one implementation:
//   full      thermal states on the hourly grid, implicit Euler with h_f;
//   averaged  thermal states on the daily grid, implicit Euler with h_c and
//             day-averaged HP heat, load and ambient temperature.
// Battery, controls, power balance and capacity limits always live on the
// fine grid.
//
// Scaled units: temperatures in 100 degC, powers in MW, design scales as-is,
// objective in 1e5 EUR. The battery state is the stored energy e = s_b * soc in
// units of the reference capacity, which keeps the battery rows linear; soc <= 1
// becomes the row e - s_b <= 0.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/core/jet.hpp"
#include "stes/econ/cost.hpp"
#include "stes/model/system.hpp"
#include "stes/timeseries/exogenous.hpp"
#include "stes/transcribe/nlp.hpp"

namespace stes::transcribe {

inline constexpr double kTempScale = 100.0;
inline constexpr double kPowerScale = 1e6;
inline constexpr double kObjectiveScale = 1e-5;
inline constexpr double kSecondsPerYear = 8760.0 * 3600.0;

enum class Variant { full, no_ptes, no_wind, only_hp };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_ptes: return "no-ptes";
    case Variant::no_wind: return "no-wind";
    case Variant::only_hp: return "only-hp";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::full, Variant::no_ptes, Variant::no_wind, Variant::only_hp}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown variant '" + s + "' (expected full, no-ptes, no-wind or only-hp)");
}

enum class Form { full, averaged };

struct ProblemSpec {
  model::SystemParams system;
  econ::CostTable costs;
  econ::ReferenceCapacities capacities;
  ts::ExogenousData data;
  GridSpec grid;
  Variant variant = Variant::full;
  /// Supply temperature when the heat pump serves the demand directly.
  double direct_supply_temperature = 40.0;

  bool has_storage() const { return variant == Variant::full || variant == Variant::no_wind; }
  bool has_battery() const { return variant != Variant::only_hp; }
  /// Share of the yearly fixed cost carried by the modelled horizon.
  double fixed_cost_weight() const { return grid.horizon() / kSecondsPerYear; }

  /// Design scales fixed at zero by the variant.
  std::array<bool, model::DesignVector::kSize> fixed_to_zero() const {
    switch (variant) {
      case Variant::full: return {false, false, false, false, false};
      case Variant::no_ptes: return {false, false, false, true, false};
      case Variant::no_wind: return {false, true, false, false, false};
      case Variant::only_hp: return {true, true, true, true, false};
    }
    return {};
  }
};

/// Day-averaged forcing of the coarse thermal dynamics.
struct AveragedInputs {
  int k = 24;
  std::vector<double> q_load;  // W, per coarse interval
  std::vector<double> t_amb;   // degC, per coarse interval
  std::vector<double> cop;     // per fine interval

  /// Mean HP heat of coarse interval j for fine electrical HP power in W.
  double q_hp(int j, std::span<const double> p_hp) const {
    double s = 0.0;
    for (int i = j * k; i < (j + 1) * k; ++i) s += cop[static_cast<std::size_t>(i)] * p_hp[static_cast<std::size_t>(i)];
    return s / k;
  }
};

inline AveragedInputs average_inputs(std::span<const double> q_load, std::span<const double> t_amb,
                                     const model::HeatPumpParams& hp, const GridSpec& grid) {
  grid.validate(true);
  if (q_load.size() != static_cast<std::size_t>(grid.n_fine) || t_amb.size() != q_load.size()) {
    throw DataError("average_inputs: series length mismatch with the fine grid");
  }
  AveragedInputs a;
  a.k = grid.k;
  a.cop.resize(q_load.size());
  for (std::size_t i = 0; i < q_load.size(); ++i) a.cop[i] = model::cop(t_amb[i], hp);
  for (int j = 0; j < grid.n_coarse(); ++j) {
    double q = 0.0, t = 0.0;
    for (int i = j * grid.k; i < (j + 1) * grid.k; ++i) {
      q += q_load[static_cast<std::size_t>(i)];
      t += t_amb[static_cast<std::size_t>(i)];
    }
    a.q_load.push_back(q / grid.k);
    a.t_amb.push_back(t / grid.k);
  }
  return a;
}

/// Physical-unit view of an NLP point.
struct Solution {
  std::vector<std::vector<double>> temperatures;  // [thermal node][layer], degC
  std::vector<double> soc;                        // fine nodes; empty without battery
  std::vector<model::ControlVector> controls;     // W, per fine interval
  model::DesignVector design;
  std::vector<double> q_hp;  // W of heat per fine interval
  double thermal_step = 0.0;
};

enum class RowKind : std::uint8_t {
  thermal_defect,
  battery_defect,
  power_balance,
  hp_capacity,
  charge_limit,
  discharge_limit,
  energy_limit,
  direct_supply,
  thermal_periodicity,
  battery_periodicity,
};

inline const char* to_string(RowKind k) {
  switch (k) {
    case RowKind::thermal_defect: return "thermal_defect";
    case RowKind::battery_defect: return "battery_defect";
    case RowKind::power_balance: return "power_balance";
    case RowKind::hp_capacity: return "hp_capacity";
    case RowKind::charge_limit: return "charge_limit";
    case RowKind::discharge_limit: return "discharge_limit";
    case RowKind::direct_supply: return "direct_supply";
    case RowKind::thermal_periodicity: return "thermal_periodicity";
    case RowKind::battery_periodicity: return "battery_periodicity";
    case RowKind::energy_limit: return "energy_limit";
  }
  return "?";
}

class EnergyNlp final : public SparseNlp {
 public:
  enum Control { kPhp = 0, kPbPlus, kPbMinus, kPgPlus, kPgMinus };

  EnergyNlp(ProblemSpec spec, Form form) : spec_(std::move(spec)), form_(form) {
    spec_.system.validate();
    spec_.costs.validate();
    spec_.grid.validate(form_ == Form::averaged);
    spec_.data.validate();
    if (spec_.data.size() != static_cast<std::size_t>(spec_.grid.n_fine)) {
      throw DataError("series length mismatch: grid has " + std::to_string(spec_.grid.n_fine) +
                      " fine intervals, series have " + std::to_string(spec_.data.size()) + " samples");
    }
    M_ = spec_.system.geometry.layers;
    N_ = spec_.system.ground.layers;
    ns_ = has_storage() ? M_ + N_ : 0;
    nv_ = ns_ + 2;
    if (has_storage() && nv_ > ad::kMaxDim) {
      throw ConfigError("too many thermal nodes for the transcription (M + N <= " +
                        std::to_string(ad::kMaxDim - 2) + ")");
    }
    cfg_ = spec_.system.dynamics();
    spec_.capacities.storage_m3 = ad::value_of(spec_.system.network(1.0).volume);
    prepare_data();
    layout();
    objective_terms();
    probe_masks();
    build_patterns();
  }

  const ProblemSpec& spec() const { return spec_; }
  Form form() const { return form_; }
  bool has_storage() const { return spec_.has_storage(); }
  bool has_battery() const { return spec_.has_battery(); }
  int storage_layers() const { return M_; }
  int ground_layers() const { return N_; }
  int fine_intervals() const { return spec_.grid.n_fine; }
  int thermal_nodes() const { return static_cast<int>(temp_idx_.size()); }
  double thermal_step() const { return form_ == Form::full ? spec_.grid.h_fine : spec_.grid.h_coarse(); }

  int temp_index(int node, int i) const { return temp_idx_[static_cast<std::size_t>(node)][static_cast<std::size_t>(i)]; }
  int soc_index(int k) const { return has_battery() ? soc_idx_[static_cast<std::size_t>(k)] : -1; }
  int control_index(int k, int c) const { return ctrl_idx_[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]; }
  int theta_index(int i) const { return theta_idx_[static_cast<std::size_t>(i)]; }
  RowKind row_kind(int j) const { return row_kind_[static_cast<std::size_t>(j)]; }
  /// COP of the heat pump in interval k for the active supply mode.
  double cop(int k) const { return cop_[static_cast<std::size_t>(k)]; }
  const econ::ReferenceCapacities& capacities() const { return spec_.capacities; }

  /// Closed-form variable count N_f (M+N+1+n_u) + n_theta without endpoint nodes.
  long formula_variable_count() const {
    const long nf = spec_.grid.n_fine;
    if (form_ == Form::full) return nf * (M_ + N_ + 1 + 5) + 5;
    return static_cast<long>(spec_.grid.n_coarse()) * (M_ + N_) + nf * (1 + 5) + 5;
  }

  // --- objective -----------------------------------------------------------

  double objective(std::span<const double> x) const override {
    check_point(x);
    double v = 0.0;
    for (std::size_t i = 0; i < grad_.size(); ++i) v += grad_[i].second * x[static_cast<std::size_t>(grad_[i].first)];
    return v;
  }

  /// Objective in EUR: grid cost over the horizon plus the weighted fixed cost.
  double objective_eur(std::span<const double> x) const { return objective(x) / kObjectiveScale; }

  void gradient(std::span<const double> x, std::span<double> g) const override {
    check_point(x);
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& [i, v] : grad_) g[static_cast<std::size_t>(i)] += v;
  }

  // --- constraints ---------------------------------------------------------

  void constraints(std::span<const double> x, std::span<double> g) const override {
    check_point(x);
    std::fill(g.begin(), g.end(), 0.0);
    const auto X = [&](int i) { return x[static_cast<std::size_t>(i)]; };
    const int nf = spec_.grid.n_fine;
    for (int k = 0; k < nf; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double php = X(control_index(k, kPhp));
      double pb = X(control_index(k, kPgPlus)) - X(control_index(k, kPgMinus)) - php - p_load_[ku];
      pb += X(theta_index(0)) * p_pv_[ku] + X(theta_index(1)) * p_wind_[ku];
      if (has_battery()) {
        const double pp = X(control_index(k, kPbPlus)), pm = X(control_index(k, kPbMinus));
        pb += pm - pp;
        const double sb = X(theta_index(2));
        g[row(bat_row_, k)] = X(soc_index(k + 1)) - X(soc_index(k)) - bat_ch_ * pp + bat_dis_ * pm;
        g[row(plim_row_, k)] = bat_lim_ * pp - sb;
        g[row(mlim_row_, k)] = bat_lim_ * pm - sb;
        g[row(elim_row_, k)] = X(soc_index(k)) - sb;
      }
      g[row(pb_row_, k)] = pb;
      g[row(cap_row_, k)] = cop_[ku] * php * hp_cap_ - X(theta_index(4));
      if (!has_storage()) g[row(direct_row_, k)] = cop_[ku] * php - q_load_mw_[ku];
    }
    if (has_storage()) {
      const auto net = spec_.system.network(X(theta_index(3)));
      std::vector<double> t(static_cast<std::size_t>(ns_)), f(static_cast<std::size_t>(ns_));
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const Block& bl = blocks_[b];
        for (int i = 0; i < ns_; ++i) t[static_cast<std::size_t>(i)] = kTempScale * X(temp_index(bl.node + 1, i));
        model::storage_rhs<double>(t, block_heat(bl, x), {bl.q_load, bl.t_amb}, net, cfg_, f);
        for (int i = 0; i < ns_; ++i) {
          g[static_cast<std::size_t>(bl.row + i)] = X(temp_index(bl.node + 1, i)) - X(temp_index(bl.node, i)) -
                                                    bl.h / kTempScale * f[static_cast<std::size_t>(i)];
        }
      }
      const int last = thermal_nodes() - 1;
      for (int i = 0; i < ns_; ++i) g[static_cast<std::size_t>(tper_row_ + i)] = X(temp_index(0, i)) - X(temp_index(last, i));
    }
    if (has_battery()) g[static_cast<std::size_t>(bper_row_)] = X(soc_index(0)) - X(soc_index(nf));
  }

  void jacobian(std::span<const double> x, std::span<double> values) const override {
    check_point(x);
    std::fill(values.begin(), values.end(), 0.0);
    std::size_t p = 0;
    traverse_jacobian(x, [&](int, int, double v) { values[static_cast<std::size_t>(jac_slot_[p++])] += v; });
  }

  void hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
               std::span<double> values) const override {
    (void)sigma;  // the objective is linear
    check_point(x);
    std::fill(values.begin(), values.end(), 0.0);
    std::size_t p = 0;
    traverse_hessian(x, lambda, [&](int, int, double v) { values[static_cast<std::size_t>(hess_slot_[p++])] += v; });
  }

  std::string variable_name(int i) const override {
    const Tag& t = var_tag_[static_cast<std::size_t>(i)];
    switch (t.kind) {
      case 0:
        return (t.sub < M_ ? "T_s" + std::to_string(t.sub + 1) : "T_g" + std::to_string(t.sub - M_ + 1)) + "[" +
               std::to_string(t.index) + "]";
      case 1: return "e_b[" + std::to_string(t.index) + "]";
      case 2: {
        static constexpr const char* names[] = {"P_hp", "P_b+", "P_b-", "P_grid+", "P_grid-"};
        return std::string(names[t.sub]) + "[" + std::to_string(t.index) + "]";
      }
      default: return model::DesignVector::names()[static_cast<std::size_t>(t.sub)];
    }
  }

  std::string constraint_name(int j) const override {
    return std::string(to_string(row_kind(j))) + "[" + std::to_string(row_index_[static_cast<std::size_t>(j)]) + "]";
  }

  // --- conversions ---------------------------------------------------------

  Solution extract(std::span<const double> x) const {
    check_point(x);
    const auto X = [&](int i) { return i < 0 ? 0.0 : x[static_cast<std::size_t>(i)]; };
    Solution s;
    s.thermal_step = thermal_step();
    for (int j = 0; j < thermal_nodes(); ++j) {
      std::vector<double> t(static_cast<std::size_t>(ns_));
      for (int i = 0; i < ns_; ++i) t[static_cast<std::size_t>(i)] = kTempScale * X(temp_index(j, i));
      s.temperatures.push_back(std::move(t));
    }
    const int nf = spec_.grid.n_fine;
    if (has_battery()) {
      const double sb = X(theta_index(2));
      for (int k = 0; k <= nf; ++k) s.soc.push_back(sb > 0.0 ? X(soc_index(k)) / sb : 0.0);
    }
    for (int k = 0; k < nf; ++k) {
      model::ControlVector u;
      u.p_hp = kPowerScale * X(control_index(k, kPhp));
      u.p_b_plus = kPowerScale * X(control_index(k, kPbPlus));
      u.p_b_minus = kPowerScale * X(control_index(k, kPbMinus));
      u.p_grid_plus = kPowerScale * X(control_index(k, kPgPlus));
      u.p_grid_minus = kPowerScale * X(control_index(k, kPgMinus));
      s.controls.push_back(u);
      s.q_hp.push_back(cop_[static_cast<std::size_t>(k)] * u.p_hp);
    }
    std::array<double, model::DesignVector::kSize> th{};
    for (int i = 0; i < model::DesignVector::kSize; ++i) th[static_cast<std::size_t>(i)] = X(theta_index(i));
    s.design = model::DesignVector::from_array(th);
    return s;
  }

  std::vector<double> pack(const Solution& s) const {
    std::vector<double> x(static_cast<std::size_t>(n()), 0.0);
    const auto put = [&](int i, double v) {
      if (i >= 0) x[static_cast<std::size_t>(i)] = v;
    };
    for (int j = 0; j < thermal_nodes(); ++j) {
      for (int i = 0; i < ns_; ++i) {
        put(temp_index(j, i), s.temperatures[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] / kTempScale);
      }
    }
    if (has_battery()) {
      for (int k = 0; k <= spec_.grid.n_fine; ++k) put(soc_index(k), s.design.s_b * s.soc[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < spec_.grid.n_fine; ++k) {
      const auto& u = s.controls[static_cast<std::size_t>(k)];
      put(control_index(k, kPhp), u.p_hp / kPowerScale);
      put(control_index(k, kPbPlus), u.p_b_plus / kPowerScale);
      put(control_index(k, kPbMinus), u.p_b_minus / kPowerScale);
      put(control_index(k, kPgPlus), u.p_grid_plus / kPowerScale);
      put(control_index(k, kPgMinus), u.p_grid_minus / kPowerScale);
    }
    const auto th = s.design.as_array();
    for (int i = 0; i < model::DesignVector::kSize; ++i) put(theta_index(i), th[static_cast<std::size_t>(i)]);
    return x;
  }

  /// Heat input and forcing of each thermal interval for fine HP powers in W.
  std::vector<double> thermal_heat(std::span<const double> p_hp_w) const {
    std::vector<double> q;
    for (const Block& b : blocks_) {
      double s = 0.0;
      for (int l = 0; l < b.w; ++l) s += cop_[static_cast<std::size_t>(b.k0 + l)] * p_hp_w[static_cast<std::size_t>(b.k0 + l)];
      q.push_back(s / b.w);
    }
    return q;
  }
  std::vector<model::StorageForcing> thermal_forcing() const {
    std::vector<model::StorageForcing> f;
    for (const Block& b : blocks_) f.push_back({b.q_load, b.t_amb});
    return f;
  }

  /// Flat start: 30 degC storage, 13.5 degC ground, soc 0.5, zero controls,
  /// unit design scales; clipped to the bounds.
  std::vector<double> initial_guess(double t_storage = 30.0, double t_ground = 13.5) const {
    std::vector<double> x(static_cast<std::size_t>(n()), 0.0);
    for (int j = 0; j < thermal_nodes(); ++j) {
      for (int i = 0; i < ns_; ++i) x[static_cast<std::size_t>(temp_index(j, i))] = (i < M_ ? t_storage : t_ground) / kTempScale;
    }
    if (has_battery()) {
      const double sb = std::clamp(1.0, x_lower_[static_cast<std::size_t>(theta_index(2))], x_upper_[static_cast<std::size_t>(theta_index(2))]);
      for (int k = 0; k <= spec_.grid.n_fine; ++k) x[static_cast<std::size_t>(soc_index(k))] = 0.5 * sb;
    }
    for (int i = 0; i < model::DesignVector::kSize; ++i) x[static_cast<std::size_t>(theta_index(i))] = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], x_lower_[i], x_upper_[i]);
    return x;
  }

 private:
  struct Block {
    int node;  // thermal interval runs from node to node + 1
    int k0;    // first fine interval of the window
    int w;     // window length in fine intervals
    double h;  // thermal step (s)
    double q_load;
    double t_amb;
    int row;  // first defect row
  };
  struct Tag {
    std::uint8_t kind;  // 0 temperature, 1 soc, 2 control, 3 design
    std::uint8_t sub;
    int index;
  };

  static std::size_t row(const std::vector<int>& r, int k) { return static_cast<std::size_t>(r[static_cast<std::size_t>(k)]); }

  void prepare_data() {
    const auto& d = spec_.data;
    const std::size_t nf = d.size();
    const auto& hp = spec_.system.heat_pump;
    for (std::size_t k = 0; k < nf; ++k) {
      p_pv_.push_back(d.p_pv0[k] / kPowerScale);
      p_wind_.push_back(d.p_wind0[k] / kPowerScale);
      p_load_.push_back(d.p_load[k] / kPowerScale);
      q_load_mw_.push_back(d.q_load[k] / kPowerScale);
      const double sink = has_storage() ? hp.t_sink : spec_.direct_supply_temperature;
      cop_.push_back(model::cop(d.t_amb[k], hp.eta_lorenz, sink));
    }
    const double hh = spec_.grid.h_fine / 3600.0;
    const auto& bp = spec_.system.battery;
    bat_ch_ = hh * bp.eta_ch * kPowerScale / bp.capacity_wh;
    bat_dis_ = hh / bp.eta_dis * kPowerScale / bp.capacity_wh;
    bat_lim_ = kPowerScale * bp.c_rate_hours / bp.capacity_wh;
    hp_cap_ = kPowerScale / spec_.system.heat_pump.capacity;
  }

  int add_var(double lo, double hi, Tag tag) {
    x_lower_.push_back(lo);
    x_upper_.push_back(hi);
    var_tag_.push_back(tag);
    return static_cast<int>(x_lower_.size()) - 1;
  }
  int add_row(RowKind kind, int index, bool equality) {
    g_lower_.push_back(equality ? 0.0 : -kInf);
    g_upper_.push_back(0.0);
    row_kind_.push_back(kind);
    row_index_.push_back(index);
    return static_cast<int>(g_lower_.size()) - 1;
  }

  void add_thermal_node(int j) {
    const auto& lim = spec_.system.limits;
    std::vector<int> idx;
    for (int i = 0; i < ns_; ++i) {
      double lo = -kInf, hi = kInf;
      if (i < M_) {
        lo = (i == 0 ? lim.t_top_min : lim.t_min) / kTempScale;
        hi = lim.t_max / kTempScale;
      }
      idx.push_back(add_var(lo, hi, {0, static_cast<std::uint8_t>(i), j}));
    }
    temp_idx_.push_back(std::move(idx));
  }

  void add_fine_interval(int k) {
    if (has_battery()) soc_idx_.push_back(add_var(0.0, model::DesignVector::kMax, {1, 0, k}));
    std::array<int, 5> u{};
    for (int c = 0; c < 5; ++c) {
      const bool battery_control = c == kPbPlus || c == kPbMinus;
      u[static_cast<std::size_t>(c)] =
          battery_control && !has_battery() ? -1 : add_var(0.0, kInf, {2, static_cast<std::uint8_t>(c), k});
    }
    ctrl_idx_.push_back(u);
  }

  void add_fine_rows(int k) {
    if (has_battery()) bat_row_.push_back(add_row(RowKind::battery_defect, k, true));
    pb_row_.push_back(add_row(RowKind::power_balance, k, true));
    cap_row_.push_back(add_row(RowKind::hp_capacity, k, false));
    if (has_battery()) {
      plim_row_.push_back(add_row(RowKind::charge_limit, k, false));
      mlim_row_.push_back(add_row(RowKind::discharge_limit, k, false));
      elim_row_.push_back(add_row(RowKind::energy_limit, k, false));
    }
    if (!has_storage()) direct_row_.push_back(add_row(RowKind::direct_supply, k, true));
  }

  void add_block(int node, int k0, int w) {
    Block b{node, k0, w, spec_.grid.h_fine * w, 0.0, 0.0, 0};
    for (int l = 0; l < w; ++l) {
      b.q_load += spec_.data.q_load[static_cast<std::size_t>(k0 + l)];
      b.t_amb += spec_.data.t_amb[static_cast<std::size_t>(k0 + l)];
    }
    b.q_load /= w;
    b.t_amb /= w;
    for (int i = 0; i < ns_; ++i) {
      const int r = add_row(RowKind::thermal_defect, node, true);
      if (i == 0) b.row = r;
    }
    blocks_.push_back(b);
  }

  // Variables interleaved by grid node, rows grouped by interval.
  void layout() {
    const int nf = spec_.grid.n_fine;
    if (form_ == Form::full || !has_storage()) {
      for (int k = 0; k < nf; ++k) {
        if (has_storage()) add_thermal_node(k);
        add_fine_interval(k);
      }
      if (has_storage()) add_thermal_node(nf);
      for (int k = 0; k < nf; ++k) {
        add_fine_rows(k);
        if (has_storage()) add_block(k, k, 1);
      }
    } else {
      const int K = spec_.grid.k, nc = spec_.grid.n_coarse();
      for (int j = 0; j < nc; ++j) {
        add_thermal_node(j);
        for (int k = j * K; k < (j + 1) * K; ++k) add_fine_interval(k);
      }
      add_thermal_node(nc);
      for (int j = 0; j < nc; ++j) {
        for (int k = j * K; k < (j + 1) * K; ++k) add_fine_rows(k);
        add_block(j, j * K, K);
      }
    }
    if (has_battery()) soc_idx_.push_back(add_var(0.0, model::DesignVector::kMax, {1, 0, nf}));
    const auto fixed = spec_.fixed_to_zero();
    for (int i = 0; i < model::DesignVector::kSize; ++i) {
      const bool f = fixed[static_cast<std::size_t>(i)];
      theta_idx_[static_cast<std::size_t>(i)] =
          add_var(f ? 0.0 : model::DesignVector::kMin, f ? 0.0 : model::DesignVector::kMax, {3, static_cast<std::uint8_t>(i), 0});
    }
    if (has_storage()) {
      for (int i = 0; i < ns_; ++i) {
        const int r = add_row(RowKind::thermal_periodicity, i, true);
        if (i == 0) tper_row_ = r;
      }
    }
    if (has_battery()) bper_row_ = add_row(RowKind::battery_periodicity, 0, true);
  }

  void objective_terms() {
    const double hh = spec_.grid.h_fine / 3600.0;
    const double kw_per_mw = 1e3;
    for (int k = 0; k < spec_.grid.n_fine; ++k) {
      grad_.emplace_back(control_index(k, kPgPlus), kObjectiveScale * hh * kw_per_mw * spec_.costs.c_buy);
      grad_.emplace_back(control_index(k, kPgMinus), -kObjectiveScale * hh * kw_per_mw * spec_.costs.c_sell);
    }
    const auto gfix = econ::fixed_cost_gradient(spec_.capacities, spec_.costs);
    for (int i = 0; i < model::DesignVector::kSize; ++i) {
      grad_.emplace_back(theta_index(i), kObjectiveScale * spec_.fixed_cost_weight() * gfix[static_cast<std::size_t>(i)]);
    }
  }

  double block_heat(const Block& b, std::span<const double> x) const {
    double q = 0.0;
    for (int l = 0; l < b.w; ++l) {
      q += cop_[static_cast<std::size_t>(b.k0 + l)] * x[static_cast<std::size_t>(control_index(b.k0 + l, kPhp))];
    }
    return q * kPowerScale / b.w;
  }

  // Local jets of the storage right-hand side over (T_next.., q, s_s).
  template <class J>
  void local_rhs(const Block& b, const model::ThermalNetworkT<J>& net, std::span<const double> x, std::vector<J>& t,
                 std::vector<J>& f) const {
    for (int i = 0; i < ns_; ++i) {
      t[static_cast<std::size_t>(i)] = J::variable(kTempScale * x[static_cast<std::size_t>(temp_index(b.node + 1, i))], i, nv_);
    }
    const J q = J::variable(block_heat(b, x), ns_, nv_);
    model::storage_rhs<J>(std::span<const J>(t), q, {b.q_load, b.t_amb}, net, cfg_, std::span<J>(f));
  }

  template <class J>
  model::ThermalNetworkT<J> jet_network(double s) const {
    const auto& sys = spec_.system;
    return model::derive_network<J>(sys.geometry, sys.ground, sys.thermal, J::variable(s, ns_ + 1, nv_));
  }

  // Structural nonzeros of the local derivatives at a generic interior point.
  void probe_masks() {
    if (!has_storage()) return;
    const auto net = jet_network<ad::Jet2>(1.37);
    std::vector<ad::Jet2> t(static_cast<std::size_t>(ns_)), f(static_cast<std::size_t>(ns_));
    for (int i = 0; i < ns_; ++i) t[static_cast<std::size_t>(i)] = ad::Jet2::variable(71.0 - 7.3 * i, i, nv_);
    const auto q = ad::Jet2::variable(3.3e6, ns_, nv_);
    model::storage_rhs<ad::Jet2>(std::span<const ad::Jet2>(t), q, {2.1e6, 4.7}, net, cfg_, std::span<ad::Jet2>(f));
    jac_mask_.assign(static_cast<std::size_t>(ns_ * nv_), false);
    hess_mask_.assign(static_cast<std::size_t>(nv_ * nv_), false);
    for (int i = 0; i < ns_; ++i) {
      for (int a = 0; a < nv_; ++a) {
        if (f[static_cast<std::size_t>(i)].grad(a) != 0.0 || a == i) jac_mask_[static_cast<std::size_t>(i * nv_ + a)] = true;
        for (int c = 0; c <= a; ++c) {
          if (f[static_cast<std::size_t>(i)].hess(a, c) != 0.0) hess_mask_[static_cast<std::size_t>(a * nv_ + c)] = true;
        }
      }
    }
  }

  template <class Emit>
  void traverse_jacobian(std::span<const double> x, Emit&& emit) const {
    const auto X = [&](int i) { return x[static_cast<std::size_t>(i)]; };
    const int nf = spec_.grid.n_fine;
    for (int k = 0; k < nf; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const int r_pb = pb_row_[ku];
      emit(r_pb, control_index(k, kPhp), -1.0);
      emit(r_pb, control_index(k, kPgPlus), 1.0);
      emit(r_pb, control_index(k, kPgMinus), -1.0);
      // Data coefficients that vanish (night, calm) stay out of the pattern.
      if (p_pv_[ku] != 0.0) emit(r_pb, theta_index(0), p_pv_[ku]);
      if (p_wind_[ku] != 0.0) emit(r_pb, theta_index(1), p_wind_[ku]);
      const int r_cap = cap_row_[ku];
      emit(r_cap, control_index(k, kPhp), cop_[ku] * hp_cap_);
      emit(r_cap, theta_index(4), -1.0);
      if (has_battery()) {
        emit(r_pb, control_index(k, kPbPlus), -1.0);
        emit(r_pb, control_index(k, kPbMinus), 1.0);
        const int r_b = bat_row_[ku];
        emit(r_b, soc_index(k + 1), 1.0);
        emit(r_b, soc_index(k), -1.0);
        emit(r_b, control_index(k, kPbPlus), -bat_ch_);
        emit(r_b, control_index(k, kPbMinus), bat_dis_);
        emit(elim_row_[ku], soc_index(k), 1.0);
        emit(elim_row_[ku], theta_index(2), -1.0);
        emit(plim_row_[ku], control_index(k, kPbPlus), bat_lim_);
        emit(plim_row_[ku], theta_index(2), -1.0);
        emit(mlim_row_[ku], control_index(k, kPbMinus), bat_lim_);
        emit(mlim_row_[ku], theta_index(2), -1.0);
      }
      if (!has_storage()) emit(direct_row_[ku], control_index(k, kPhp), cop_[ku]);
    }
    if (has_storage()) {
      const auto net = jet_network<ad::Dual>(X(theta_index(3)));
      std::vector<ad::Dual> t(static_cast<std::size_t>(ns_)), f(static_cast<std::size_t>(ns_));
      for (const Block& b : blocks_) {
        local_rhs(b, net, x, t, f);
        const double c = b.h / kTempScale;
        for (int i = 0; i < ns_; ++i) {
          const int r = b.row + i;
          const auto& fi = f[static_cast<std::size_t>(i)];
          emit(r, temp_index(b.node, i), -1.0);
          for (int a = 0; a < ns_; ++a) {
            if (!jac_mask_[static_cast<std::size_t>(i * nv_ + a)]) continue;
            emit(r, temp_index(b.node + 1, a), (a == i ? 1.0 : 0.0) - c * kTempScale * fi.grad(a));
          }
          if (jac_mask_[static_cast<std::size_t>(i * nv_ + ns_)]) {
            for (int l = 0; l < b.w; ++l) {
              const double dq = cop_[static_cast<std::size_t>(b.k0 + l)] * kPowerScale / b.w;
              emit(r, control_index(b.k0 + l, kPhp), -c * dq * fi.grad(ns_));
            }
          }
          if (jac_mask_[static_cast<std::size_t>(i * nv_ + ns_ + 1)]) emit(r, theta_index(3), -c * fi.grad(ns_ + 1));
        }
      }
      const int last = thermal_nodes() - 1;
      for (int i = 0; i < ns_; ++i) {
        emit(tper_row_ + i, temp_index(0, i), 1.0);
        emit(tper_row_ + i, temp_index(last, i), -1.0);
      }
    }
    if (has_battery()) {
      emit(bper_row_, soc_index(0), 1.0);
      emit(bper_row_, soc_index(nf), -1.0);
    }
  }

  template <class Emit>
  void traverse_hessian(std::span<const double> x, std::span<const double> lambda, Emit&& emit) const {
    const auto L = [&](int j) { return lambda[static_cast<std::size_t>(j)]; };
    const auto put = [&](int r, int c, double v) {
      if (r < c) std::swap(r, c);
      emit(r, c, v);
    };
    if (!has_storage()) return;
    const auto net = jet_network<ad::Jet2>(x[static_cast<std::size_t>(theta_index(3))]);
    std::vector<ad::Jet2> t(static_cast<std::size_t>(ns_)), f(static_cast<std::size_t>(ns_));
    std::vector<double> H(static_cast<std::size_t>(nv_ * nv_));
    for (const Block& b : blocks_) {
      local_rhs(b, net, x, t, f);
      std::fill(H.begin(), H.end(), 0.0);
      const double c = b.h / kTempScale;
      for (int i = 0; i < ns_; ++i) {
        const double w = -c * L(b.row + i);
        const auto& fi = f[static_cast<std::size_t>(i)];
        for (int a = 0; a < nv_; ++a) {
          for (int e = 0; e <= a; ++e) {
            if (hess_mask_[static_cast<std::size_t>(a * nv_ + e)]) H[static_cast<std::size_t>(a * nv_ + e)] += w * fi.hess(a, e);
          }
        }
      }
      // Map local (T, q, s) to global (z_next, p_hp.., s_s).
      const auto global = [&](int a, const auto& fn) {
        if (a < ns_) {
          fn(temp_index(b.node + 1, a), kTempScale);
        } else if (a == ns_) {
          for (int l = 0; l < b.w; ++l) {
            fn(control_index(b.k0 + l, kPhp), cop_[static_cast<std::size_t>(b.k0 + l)] * kPowerScale / b.w);
          }
        } else {
          fn(theta_index(3), 1.0);
        }
      };
      for (int a = 0; a < nv_; ++a) {
        for (int e = 0; e <= a; ++e) {
          if (!hess_mask_[static_cast<std::size_t>(a * nv_ + e)]) continue;
          const double h = H[static_cast<std::size_t>(a * nv_ + e)];
          global(a, [&](int ga, double sa) {
            global(e, [&](int ge, double se) {
              // Off-diagonal local pairs map to both (ga, ge) and (ge, ga); the lower triangle sees each once.
              if (a == e && ga < ge) return;
              put(ga, ge, h * sa * se);
            });
          });
        }
      }
    }
  }

  // Pattern = emission order at construction; duplicates share one slot.
  void build_patterns() {
    const auto x = initial_guess();
    std::vector<double> lam(static_cast<std::size_t>(m()), 1.0);
    std::map<std::pair<int, int>, int> slots;
    traverse_jacobian(x, [&](int r, int c, double) {
      auto [it, inserted] = slots.try_emplace({r, c}, static_cast<int>(jac_rows_.size()));
      if (inserted) {
        jac_rows_.push_back(r);
        jac_cols_.push_back(c);
      }
      jac_slot_.push_back(it->second);
    });
    slots.clear();
    traverse_hessian(x, lam, [&](int r, int c, double) {
      auto [it, inserted] = slots.try_emplace({r, c}, static_cast<int>(hess_rows_.size()));
      if (inserted) {
        hess_rows_.push_back(r);
        hess_cols_.push_back(c);
      }
      hess_slot_.push_back(it->second);
    });
  }

  ProblemSpec spec_;
  Form form_;
  int M_ = 0, N_ = 0, ns_ = 0, nv_ = 0;
  model::DynamicsConfig cfg_;

  std::vector<double> p_pv_, p_wind_, p_load_, q_load_mw_, cop_;
  double bat_ch_ = 0.0, bat_dis_ = 0.0, bat_lim_ = 0.0, hp_cap_ = 0.0;

  std::vector<std::vector<int>> temp_idx_;
  std::vector<int> soc_idx_;
  std::vector<std::array<int, 5>> ctrl_idx_;
  std::array<int, model::DesignVector::kSize> theta_idx_{};
  std::vector<Tag> var_tag_;

  std::vector<Block> blocks_;
  std::vector<int> bat_row_, pb_row_, cap_row_, plim_row_, mlim_row_, elim_row_, direct_row_;
  int tper_row_ = -1, bper_row_ = -1;
  std::vector<RowKind> row_kind_;
  std::vector<int> row_index_;

  std::vector<std::pair<int, double>> grad_;
  std::vector<bool> jac_mask_, hess_mask_;
  std::vector<int> jac_slot_, hess_slot_;
};

inline EnergyNlp build_full_nlp(ProblemSpec spec) { return EnergyNlp(std::move(spec), Form::full); }
inline EnergyNlp build_averaged_nlp(ProblemSpec spec) { return EnergyNlp(std::move(spec), Form::averaged); }

/// Value (EUR) and gradient (EUR per scaled unit) of the objective.
inline std::pair<double, std::vector<double>> objective_and_gradient(const EnergyNlp& nlp, std::span<const double> x) {
  std::vector<double> g(static_cast<std::size_t>(nlp.n()));
  nlp.gradient(x, g);
  for (double& v : g) v /= kObjectiveScale;
  return {nlp.objective_eur(x), std::move(g)};
}

}  // namespace stes::transcribe
