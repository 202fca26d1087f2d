#pragma once

// Exogenous profile synthesis: PV output from irradiance and ambient
// temperature, and the space-heating / domestic-hot-water heat demand.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/timeseries/series.hpp"

namespace stes::ts {

struct PvModuleParams {
  double eta_ref = 0.232;
  /// Datasheet temperature coefficient (negative: efficiency drops as the cell heats up).
  double beta_ref = -0.00290;
  double t_ref = 25.0;
  double performance_ratio = 0.9;
  double tilt_deg = 30.0;
  double c1 = -3.75;
  double c2 = 1.14;
  double c3 = 0.0175;

  void validate() const {
    if (!(eta_ref > 0.0 && eta_ref < 1.0)) throw ConfigError("pv: eta_ref must lie in (0, 1)");
    if (!(performance_ratio > 0.0 && performance_ratio <= 1.0)) {
      throw ConfigError("pv: performance_ratio must lie in (0, 1]");
    }
    if (!(beta_ref < 0.0)) throw ConfigError("pv: beta_ref must be negative");
    if (!(tilt_deg >= 0.0 && tilt_deg < 90.0)) throw ConfigError("pv: tilt must lie in [0, 90) degrees");
  }
};

inline double cell_temperature(double gsi, double t_amb, const PvModuleParams& p) {
  return p.c1 + p.c2 * t_amb + p.c3 * gsi;
}

/// Module output in W per m^2 of module area for a given plane-of-array irradiance.
inline double pv_output_per_area(double gsi, double t_amb, const PvModuleParams& p) {
  if (gsi <= 0.0) return 0.0;
  const double t_cell = cell_temperature(gsi, t_amb, p);
  const double out = gsi * p.eta_ref * (1.0 + p.beta_ref * (t_cell - p.t_ref)) * p.performance_ratio;
  return out > 0.0 ? out : 0.0;
}

/// Plane-of-array irradiance estimated from horizontal irradiance by dividing by cos(tilt).
inline HourlySeries gsi_from_ghi(const HourlySeries& ghi, const PvModuleParams& p) {
  const double c = std::cos(p.tilt_deg * std::numbers::pi / 180.0);
  std::vector<double> out(ghi.size());
  for (std::size_t k = 0; k < ghi.size(); ++k) out[k] = ghi[k] / c;
  return HourlySeries(Unit::WattPerSquareMetre, std::move(out), ghi.start_epoch());
}

inline HourlySeries pv_power_from_gsi(const HourlySeries& gsi, const HourlySeries& t_amb, const PvModuleParams& p) {
  require_same_length(gsi, t_amb, "pv_power");
  p.validate();
  std::vector<double> out(gsi.size());
  for (std::size_t k = 0; k < gsi.size(); ++k) out[k] = pv_output_per_area(gsi[k], t_amb[k], p);
  return HourlySeries(Unit::WattPerSquareMetre, std::move(out), gsi.start_epoch());
}

/// PV output in W per m^2 of module area from horizontal irradiance.
inline HourlySeries pv_power(const HourlySeries& ghi, const HourlySeries& t_amb, const PvModuleParams& p) {
  return pv_power_from_gsi(gsi_from_ghi(ghi, p), t_amb, p);
}

/// Module area needed for a given peak capacity (W_p) at 1000 W/m^2 standard irradiance.
inline double module_area_for_capacity(double capacity_wp, const PvModuleParams& p) {
  return capacity_wp / (1000.0 * p.eta_ref);
}

struct HeatLoadParams {
  double t_border = 12.0;
  double t_room = 20.0;
  double morning_peak_mu = 7.0;
  double morning_peak_sigma = 1.5;
  double evening_peak_mu = 19.0;
  double evening_peak_sigma = 2.0;
  double annual_sh_target_wh = 34e9;
  double annual_dhw_target_wh = 17e9;

  void validate() const {
    if (!(t_border < t_room)) throw ConfigError("heat load: t_border must be below t_room");
    if (!(morning_peak_sigma > 0.0 && evening_peak_sigma > 0.0)) {
      throw ConfigError("heat load: Gaussian widths must be positive");
    }
    if (!(annual_sh_target_wh > 0.0 && annual_dhw_target_wh > 0.0)) {
      throw ConfigError("heat load: annual targets must be positive");
    }
  }
};

/// Trailing one-day mean of the ambient temperature; the window wraps around
/// the start of the (periodic) year.
inline HourlySeries effective_temperature(const HourlySeries& t_amb) {
  constexpr std::size_t window = 24;
  const std::size_t n = t_amb.size();
  if (n < window) throw DataError("effective_temperature: need at least 24 samples");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < window; ++j) s += t_amb[(k + n - j) % n];
    out[k] = s / static_cast<double>(window);
  }
  return HourlySeries(Unit::Celsius, std::move(out), t_amb.start_epoch());
}

/// Space heating demand in W for an explicit scale s_sh (W/K).
inline HourlySeries space_heating_scaled(const HourlySeries& t_eff, const HeatLoadParams& p, double s_sh) {
  std::vector<double> out(t_eff.size());
  for (std::size_t k = 0; k < t_eff.size(); ++k) {
    out[k] = t_eff[k] >= p.t_border ? 0.0 : s_sh * (p.t_room - t_eff[k]);
  }
  return HourlySeries(Unit::Watt, std::move(out), t_eff.start_epoch());
}

/// Multiplier that brings the annual integral (unit-hours) of `shape` to `target`.
inline double calibration_scale(const HourlySeries& shape, double target) {
  const double total = shape.integral_unit_hours();
  if (!(total > 0.0)) throw ConfigError("calibration: profile integrates to zero; target is unreachable");
  return target / total;
}

struct CalibratedProfile {
  HourlySeries series;
  double scale = 0.0;
};

/// Space heating demand with s_sh chosen so the annual total equals the configured target.
inline CalibratedProfile space_heating(const HourlySeries& t_eff, const HeatLoadParams& p) {
  p.validate();
  const auto unit_shape = space_heating_scaled(t_eff, p, 1.0);
  if (!(unit_shape.integral_unit_hours() > 0.0)) {
    throw ConfigError("space heating calibration: effective temperature never falls below t_border");
  }
  const double s_sh = calibration_scale(unit_shape, p.annual_sh_target_wh);
  return {space_heating_scaled(t_eff, p, s_sh), s_sh};
}

/// Un-scaled daily double-Gaussian tap profile evaluated at hour-of-day `hour`.
inline double dhw_shape(double hour, const HeatLoadParams& p) {
  auto g = [](double t, double mu, double sigma) { return std::exp(-(t - mu) * (t - mu) / (2.0 * sigma * sigma)); };
  return g(hour, p.morning_peak_mu, p.morning_peak_sigma) + g(hour, p.evening_peak_mu, p.evening_peak_sigma);
}

inline CalibratedProfile dhw_demand(const HeatLoadParams& p, std::size_t samples = kHoursPerYear,
                                    std::int64_t start_epoch = 0) {
  p.validate();
  std::vector<double> shape(samples);
  for (std::size_t k = 0; k < samples; ++k) shape[k] = dhw_shape(static_cast<double>(k % 24), p);
  const HourlySeries unit_shape(Unit::Watt, shape, start_epoch);
  const double s_dhw = calibration_scale(unit_shape, p.annual_dhw_target_wh);
  for (double& v : shape) v *= s_dhw;
  return {HourlySeries(Unit::Watt, std::move(shape), start_epoch), s_dhw};
}

inline HourlySeries total_heat_load(const HourlySeries& sh, const HourlySeries& dhw) {
  require_same_length(sh, dhw, "total_heat_load");
  std::vector<double> out(sh.size());
  for (std::size_t k = 0; k < sh.size(); ++k) out[k] = sh[k] + dhw[k];
  return HourlySeries(Unit::Watt, std::move(out), sh.start_epoch());
}

/// Full heat-load synthesis from ambient temperature: space heating plus hot water.
inline HourlySeries synthesize_heat_load(const HourlySeries& t_amb, const HeatLoadParams& p) {
  const auto sh = space_heating(effective_temperature(t_amb), p);
  const auto dhw = dhw_demand(p, t_amb.size(), t_amb.start_epoch());
  return total_heat_load(sh.series, dhw.series);
}

}  // namespace stes::ts
