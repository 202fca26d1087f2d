#pragma once

// Investment and running costs of the energy system, annuities and the
// present-value breakdown.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "stes/core/error.hpp"
#include "stes/model/params.hpp"

namespace stes::econ {

enum class Component { pv = 0, wind, battery, storage, heat_pump };
inline constexpr int kComponents = 5;

inline constexpr std::array<const char*, kComponents> kComponentNames = {"PV", "Wind", "Battery", "PTES", "Heatpump"};
inline constexpr std::array<const char*, kComponents> kCapacityUnits = {"MWp", "MWp", "MWh", "m3", "MWth"};

struct CostTable {
  // Specific investment, in the order of `Component`. PV, wind and battery
  // are priced in USD (per kWp, kWp, kWh), storage in EUR/m3, heat pump in EUR/kW.
  std::array<double, kComponents> specific_cost = {1491.0, 1569.0, 476.0, 30.0, 651.0};
  std::array<bool, kComponents> priced_in_usd = {true, true, true, false, false};
  std::array<double, kComponents> opex_fraction = {0.01, 0.02, 0.02, 0.01, 0.025};
  double fx_usd_to_eur = 0.92;
  double c_buy = 0.30;   // EUR/kWh
  double c_sell = 0.01;  // EUR/kWh
  int years = 30;
  double rate = 0.04;
  double floor_area = 1.1e6;  // m2

  void validate() const {
    for (int i = 0; i < kComponents; ++i) {
      if (!(specific_cost[i] >= 0.0) || !(opex_fraction[i] >= 0.0)) throw ConfigError("cost table: costs must be >= 0");
    }
    if (!(fx_usd_to_eur > 0.0)) throw ConfigError("cost table: fx rate must be positive");
    if (!(c_buy >= 0.0) || !(c_sell >= 0.0)) throw ConfigError("cost table: electricity prices must be >= 0");
    if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("cost table: discount rate must lie in (0, 1)");
    if (years < 1) throw ConfigError("cost table: horizon must be at least one year");
    if (!(floor_area > 0.0)) throw ConfigError("cost table: floor area must be positive");
  }

  /// EUR per unit of capacity in the native unit (W for power, Wh for energy, m3).
  double eur_per_unit(Component c) const {
    const auto i = static_cast<std::size_t>(c);
    const double fx = priced_in_usd[i] ? fx_usd_to_eur : 1.0;
    const double per_native = c == Component::storage ? 1.0 : 1e-3;  // per kW(h) -> per W(h)
    return specific_cost[i] * fx * per_native;
  }
};

/// Installed capacities at design scale 1.
struct ReferenceCapacities {
  double pv_wp = 20e6;
  double wind_w = 11.2e6;
  double battery_wh = 10e6;
  double storage_m3 = 200403.0;
  double hp_w = 10e6;

  std::array<double, kComponents> as_array() const { return {pv_wp, wind_w, battery_wh, storage_m3, hp_w}; }
};

inline double annuity_factor(double r, int n) {
  if (!(r > 0.0)) throw DomainError("annuity factor: rate must be positive");
  if (n < 1) throw DomainError("annuity factor: horizon must be at least one year");
  const double g = std::pow(1.0 + r, n);
  return r * g / (g - 1.0);
}

/// Sum of discount factors (1+r)^-t for t = 1..n.
inline double present_value_factor(double r, int n) {
  if (!(r > 0.0)) throw DomainError("present value factor: rate must be positive");
  if (n < 1) throw DomainError("present value factor: horizon must be at least one year");
  return (1.0 - std::pow(1.0 + r, -n)) / r;
}

struct ComponentCost {
  double capacity = 0.0;  // native unit
  double capex = 0.0;     // EUR
  double opex = 0.0;      // EUR/year
};

struct FixedCost {
  std::array<ComponentCost, kComponents> components{};
  double capex_sum = 0.0;
  double opex_sum = 0.0;
  double ani = 0.0;
  double j_fix = 0.0;  // EUR/year
};

inline FixedCost fixed_cost(const model::DesignVector& design, const ReferenceCapacities& ref, const CostTable& t) {
  const auto s = design.as_array();
  const auto c0 = ref.as_array();
  FixedCost f;
  for (int i = 0; i < kComponents; ++i) {
    auto& c = f.components[static_cast<std::size_t>(i)];
    c.capacity = s[static_cast<std::size_t>(i)] * c0[static_cast<std::size_t>(i)];
    c.capex = c.capacity * t.eur_per_unit(static_cast<Component>(i));
    c.opex = t.opex_fraction[static_cast<std::size_t>(i)] * c.capex;
    f.capex_sum += c.capex;
    f.opex_sum += c.opex;
  }
  f.ani = f.capex_sum * annuity_factor(t.rate, t.years);
  f.j_fix = f.ani + f.opex_sum;
  return f;
}

/// dJ_fix/ds for each design scale; J_fix is linear in the scales.
inline std::array<double, kComponents> fixed_cost_gradient(const ReferenceCapacities& ref, const CostTable& t) {
  const double anf = annuity_factor(t.rate, t.years);
  const auto c0 = ref.as_array();
  std::array<double, kComponents> g{};
  for (std::size_t i = 0; i < kComponents; ++i) {
    g[i] = c0[i] * t.eur_per_unit(static_cast<Component>(i)) * (anf + t.opex_fraction[i]);
  }
  return g;
}

/// Grid cost c_buy*E+ - c_sell*E- in EUR for power series in W sampled every h seconds.
inline double running_cost(std::span<const double> grid_import, std::span<const double> grid_export,
                           const CostTable& t, double h = 3600.0) {
  if (grid_import.size() != grid_export.size()) throw DataError("running cost: series lengths differ");
  const double kwh_per_w = h / 3600.0 * 1e-3;
  double s = 0.0;
  for (std::size_t k = 0; k < grid_import.size(); ++k) {
    s += kwh_per_w * (t.c_buy * grid_import[k] - t.c_sell * grid_export[k]);
  }
  return s;
}

struct StorageEfficiency {
  double heat_in_wh = 0.0;
  double heat_out_wh = 0.0;
  std::optional<double> value;
  std::string note;
};

/// Ratio of heat delivered to demand over heat supplied by the heat pump.
inline StorageEfficiency storage_efficiency(std::span<const double> q_in, std::span<const double> q_out,
                                            double h = 3600.0) {
  if (q_in.size() != q_out.size()) throw DataError("storage efficiency: series lengths differ");
  StorageEfficiency e;
  for (std::size_t k = 0; k < q_in.size(); ++k) {
    e.heat_in_wh += q_in[k] * h / 3600.0;
    e.heat_out_wh += q_out[k] * h / 3600.0;
  }
  if (!(e.heat_in_wh > 0.0)) {
    e.note = "undefined: no heat charged";
  } else if (!(e.heat_out_wh > 0.0)) {
    e.note = "undefined: no heat discharged";
  } else {
    e.value = e.heat_out_wh / e.heat_in_wh;
  }
  return e;
}

/// Share of the total electricity demand (heat pump plus load) not imported.
inline double autonomy(std::span<const double> p_hp, std::span<const double> p_load,
                       std::span<const double> p_grid_import) {
  if (p_hp.size() != p_load.size() || p_hp.size() != p_grid_import.size()) {
    throw DataError("autonomy: series lengths differ");
  }
  double e_tot = 0.0, e_buy = 0.0;
  for (std::size_t k = 0; k < p_hp.size(); ++k) {
    e_tot += p_hp[k] + p_load[k];
    e_buy += p_grid_import[k];
  }
  if (!(e_tot > 0.0)) throw DomainError("autonomy: total electricity demand is zero");
  return (e_tot - e_buy) / e_tot;
}

/// Yearly and present-value view of one solution.
struct CostBreakdown {
  FixedCost fixed;
  std::array<bool, kComponents> present{true, true, true, true, true};
  double grid_import = 0.0;  // EUR/year
  double grid_export = 0.0;  // EUR/year revenue, positive
  double pv_factor = 0.0;
  double anf = 0.0;
  double floor_area = 1.0;

  double yearly_total() const { return fixed.j_fix + grid_import - grid_export; }
  double npv(double yearly) const { return yearly * pv_factor; }
  double npv_total() const { return fixed.capex_sum + npv(fixed.opex_sum + grid_import - grid_export); }
  double cost_per_m2() const { return npv_total() * anf / floor_area; }
};

inline CostBreakdown make_breakdown(const model::DesignVector& design, const ReferenceCapacities& ref,
                                    const CostTable& t, std::span<const double> grid_import_w,
                                    std::span<const double> grid_export_w, double h = 3600.0) {
  CostBreakdown b;
  b.fixed = fixed_cost(design, ref, t);
  const auto s = design.as_array();
  for (std::size_t i = 0; i < kComponents; ++i) b.present[i] = s[i] > 0.0;
  CostTable buy_only = t, sell_only = t;
  buy_only.c_sell = 0.0;
  sell_only.c_buy = 0.0;
  b.grid_import = running_cost(grid_import_w, grid_export_w, buy_only, h);
  b.grid_export = -running_cost(grid_import_w, grid_export_w, sell_only, h);
  b.pv_factor = present_value_factor(t.rate, t.years);
  b.anf = annuity_factor(t.rate, t.years);
  b.floor_area = t.floor_area;
  return b;
}

}  // namespace stes::econ
