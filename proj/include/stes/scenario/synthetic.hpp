#pragma once

// Deterministic synthetic weather and demand year with mid-European
// characteristics: cold winters, summer-peaked PV, winter-peaked wind.
// Used wherever the measured scenario data are not available.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "stes/timeseries/exogenous.hpp"
#include "stes/timeseries/profiles.hpp"

namespace stes::scenario {

struct SyntheticOptions {
  std::uint64_t seed = 2023;
  std::int64_t start_epoch = 1672531200;  // 2023-01-01 00:00 UTC
  double latitude_deg = 48.0;
  double t_mean = 11.5;
  double t_annual_amplitude = 9.0;
  double t_daily_amplitude = 4.0;
  double t_noise_sd = 2.5;
  double pv_capacity_wp = 20e6;
  double wind_capacity_w = 11.2e6;
  double wind_mean_speed = 7.2;
  double wind_seasonal_amplitude = 1.6;
  double wind_noise_sd = 2.8;
  double annual_electricity_wh = 32e9;
  ts::PvModuleParams pv;
  ts::HeatLoadParams heat;
};

namespace detail {

inline double wind_power_curve(double v) {
  constexpr double cut_in = 3.0, rated = 11.5, cut_out = 25.0;
  if (v < cut_in || v >= cut_out) return 0.0;
  if (v >= rated) return 1.0;
  const double a = (v * v * v - cut_in * cut_in * cut_in) / (rated * rated * rated - cut_in * cut_in * cut_in);
  return std::clamp(a, 0.0, 1.0);
}

inline double clear_sky_ghi(double day, double hour, double lat_deg) {
  const double rad = std::numbers::pi / 180.0;
  const double decl = 23.45 * rad * std::sin(2.0 * std::numbers::pi * (284.0 + day) / 365.0);
  const double omega = 15.0 * rad * (hour + 0.5 - 12.0);
  const double lat = lat_deg * rad;
  const double sin_alt = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(omega);
  if (sin_alt <= 0.02) return 0.0;
  return 1098.0 * sin_alt * std::exp(-0.057 / sin_alt);
}

}  // namespace detail

/// The raw measured-style inputs of a scenario: ambient temperature, GHI,
/// wind power at the reference capacity and electricity demand.
struct SyntheticWeather {
  ts::HourlySeries t_amb;
  ts::HourlySeries ghi;
  ts::HourlySeries wind;
  ts::HourlySeries load;
};

inline SyntheticWeather synthetic_weather(const SyntheticOptions& o = {}) {
  constexpr std::size_t n = ts::kHoursPerYear;
  const double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> t(n), ghi(n), wind(n), el(n);
  const double phi_t = 0.995;
  double ar_t = 0.0;
  const double phi_w = 0.97;
  double ar_w = 0.0;
  double ar_cloud = 0.0;
  double clearness = 0.7;
  for (std::size_t k = 0; k < n; ++k) {
    const double day = static_cast<double>(k / 24);
    const double hour = static_cast<double>(k % 24);
    const double season = std::cos(two_pi * (day - 15.0) / 365.0);  // +1 mid-January

    ar_t = phi_t * ar_t + std::sqrt(1.0 - phi_t * phi_t) * gauss(rng);
    t[k] = o.t_mean - o.t_annual_amplitude * season +
           o.t_daily_amplitude * std::cos(two_pi * (hour - 15.0) / 24.0) + o.t_noise_sd * ar_t;
    t[k] = std::clamp(t[k], -30.0, 40.0);

    if (k % 24 == 0) {
      ar_cloud = 0.6 * ar_cloud + 0.8 * gauss(rng);
      clearness = std::clamp(0.62 - 0.12 * season + 0.22 * ar_cloud, 0.12, 1.0);
    }
    ghi[k] = clearness * detail::clear_sky_ghi(day, hour, o.latitude_deg);

    ar_w = phi_w * ar_w + std::sqrt(1.0 - phi_w * phi_w) * gauss(rng);
    const double v = std::max(0.0, o.wind_mean_speed + o.wind_seasonal_amplitude * season + o.wind_noise_sd * ar_w);
    wind[k] = o.wind_capacity_w * detail::wind_power_curve(v);

    const double daily = 1.0 + 0.25 * std::exp(-std::pow(hour - 8.0, 2) / 8.0) +
                         0.45 * std::exp(-std::pow(hour - 19.0, 2) / 6.0) - 0.25 * std::exp(-std::pow(hour - 3.0, 2) / 6.0);
    el[k] = (1.0 + 0.18 * season) * daily * (1.0 + 0.05 * gauss(rng));
  }

  double el_sum = 0.0;
  for (double v : el) el_sum += v;
  for (double& v : el) v *= o.annual_electricity_wh / el_sum;

  return {ts::HourlySeries(ts::Unit::Celsius, t, o.start_epoch),
          ts::HourlySeries(ts::Unit::WattPerSquareMetre, ghi, o.start_epoch),
          ts::HourlySeries(ts::Unit::Watt, wind, o.start_epoch), ts::HourlySeries(ts::Unit::Watt, el, o.start_epoch)};
}

/// One year (8760 h) of exogenous data. Heating demand follows the
/// calibrated space-heating/hot-water model.
inline ts::ExogenousData synthetic_year(const SyntheticOptions& o = {}) {
  const auto w = synthetic_weather(o);
  const auto pv_area = ts::pv_power(w.ghi, w.t_amb, o.pv);
  const double area = ts::module_area_for_capacity(o.pv_capacity_wp, o.pv);
  std::vector<double> pv(pv_area.size());
  for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = area * pv_area[k];

  ts::ExogenousData d{w.t_amb, ts::HourlySeries(ts::Unit::Watt, pv, o.start_epoch), w.wind, w.load,
                      ts::synthesize_heat_load(w.t_amb, o.heat)};
  d.validate();
  return d;
}

/// Exogenous data with every profile held at its annual mean (constant inputs).
inline ts::ExogenousData constant_year(const ts::ExogenousData& src) {
  auto flat = [](const ts::HourlySeries& s) {
    const double mean = s.integral_unit_hours() / static_cast<double>(s.size());
    return ts::HourlySeries(s.unit(), std::vector<double>(s.size(), mean), s.start_epoch());
  };
  return {flat(src.t_amb), flat(src.p_pv0), flat(src.p_wind0), flat(src.p_load), flat(src.q_load)};
}

}  // namespace stes::scenario
