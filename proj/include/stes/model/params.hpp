#pragma once

#include <array>
#include <string>
#include <vector>

#include "stes/core/error.hpp"

namespace stes::model {

inline constexpr double kKelvinOffset = 273.15;

/// Truncated square pyramid; side lengths refer to the reference volume (scale 1).
struct StorageGeometry {
  double top_side = 153.3;
  double bottom_side = 73.2;
  double height = 15.0;
  int layers = 4;

  void validate() const {
    if (!(top_side > bottom_side && bottom_side > 0.0)) {
      throw ConfigError("storage geometry: need top_side > bottom_side > 0");
    }
    if (!(height > 0.0)) throw ConfigError("storage geometry: height must be positive");
    if (layers < 1) throw ConfigError("storage geometry: at least one layer required");
  }
};

struct GroundMesh {
  int layers = 2;
  double boundary_distance = 4.0;
  double t_boundary = 13.5;

  void validate() const {
    if (layers < 1) throw ConfigError("ground mesh: at least one layer required");
    if (!(boundary_distance > 0.0)) throw ConfigError("ground mesh: boundary distance must be positive");
  }
};

struct ThermalParams {
  double rho = 1000.0;
  double c_p = 4200.0;
  double rho_g = 2000.0;
  double c_p_g = 700.0;
  double lambda_g = 0.47;
  double lambda_eff = 0.644;
  double u_top = 0.186;
  double u_wall = 90.0;

  void validate() const {
    for (double v : {rho, c_p, rho_g, c_p_g, lambda_g, lambda_eff, u_top, u_wall}) {
      if (!(v > 0.0)) throw ConfigError("thermal parameters must all be strictly positive");
    }
  }
};

struct HeatPumpParams {
  double eta_lorenz = 0.5;
  double t_sink = 86.0;
  /// Default thermal capacity C_hp,0 in W.
  double capacity = 10e6;
  /// Minimum admissible lift T_sink - T_bottom (K) before the charge mass flow is rejected.
  double min_lift_margin = 0.5;

  void validate(double max_storage_temperature) const {
    if (!(eta_lorenz > 0.0 && eta_lorenz <= 1.0)) throw ConfigError("heat pump: eta_lorenz must lie in (0, 1]");
    if (!(t_sink > max_storage_temperature)) {
      throw ConfigError("heat pump: sink temperature must exceed the maximum storage temperature");
    }
    if (!(capacity > 0.0)) throw ConfigError("heat pump: default capacity must be positive");
  }
};

struct BatteryParams {
  /// Default capacity C_b,0 in Wh.
  double capacity_wh = 10e6;
  double eta_ch = 0.95;
  double eta_dis = 0.95;
  /// Charge/discharge power limit is capacity / c_rate_hours.
  double c_rate_hours = 4.0;

  void validate() const {
    if (!(eta_ch > 0.0 && eta_ch <= 1.0 && eta_dis > 0.0 && eta_dis <= 1.0)) {
      throw ConfigError("battery: efficiencies must lie in (0, 1]");
    }
    if (!(c_rate_hours > 0.0)) throw ConfigError("battery: c_rate_hours must be positive");
    if (!(capacity_wh > 0.0)) throw ConfigError("battery: default capacity must be positive");
  }
};

/// Storage temperature limits and the district supply/return spread.
struct OperatingLimits {
  double t_top_min = 40.0;
  double t_min = 10.0;
  double t_max = 85.0;
  double supply_return_spread = 20.0;
};

/// Scaling factors relative to the default installed capacities.
struct DesignVector {
  double s_pv = 1.0;
  double s_wind = 1.0;
  double s_b = 1.0;
  double s_s = 1.0;
  double s_hp = 1.0;

  static constexpr double kMin = 0.1;
  static constexpr double kMax = 10.0;
  static constexpr int kSize = 5;

  std::array<double, kSize> as_array() const { return {s_pv, s_wind, s_b, s_s, s_hp}; }
  static DesignVector from_array(const std::array<double, kSize>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
  static constexpr std::array<const char*, kSize> names() { return {"s_pv", "s_wind", "s_b", "s_s", "s_hp"}; }
};

/// Five non-negative power flows in W.
struct ControlVector {
  double p_hp = 0.0;
  double p_b_plus = 0.0;
  double p_b_minus = 0.0;
  double p_grid_plus = 0.0;
  double p_grid_minus = 0.0;

  static constexpr int kSize = 5;
};

/// Storage layer temperatures (index 0 = top), ground layer temperatures (index 0 =
/// nearest the storage), and battery state of charge. Temperatures in degC.
struct SystemState {
  std::vector<double> t_storage;
  std::vector<double> t_ground;
  double soc = 0.5;

  std::size_t thermal_size() const { return t_storage.size() + t_ground.size(); }

  static SystemState uniform(int storage_layers, int ground_layers, double t_s, double t_g, double soc = 0.5) {
    return {std::vector<double>(static_cast<std::size_t>(storage_layers), t_s),
            std::vector<double>(static_cast<std::size_t>(ground_layers), t_g), soc};
  }

  std::vector<double> thermal() const {
    std::vector<double> x = t_storage;
    x.insert(x.end(), t_ground.begin(), t_ground.end());
    return x;
  }

  void set_thermal(const std::vector<double>& x) {
    const auto m = t_storage.size();
    for (std::size_t i = 0; i < m; ++i) t_storage[i] = x[i];
    for (std::size_t i = 0; i < t_ground.size(); ++i) t_ground[i] = x[m + i];
  }

  /// Checks the operating bounds; returns an empty string when satisfied.
  std::string bound_violation(const OperatingLimits& lim, double tol = 0.0) const {
    for (std::size_t m = 0; m < t_storage.size(); ++m) {
      const double lo = m == 0 ? lim.t_top_min : lim.t_min;
      if (t_storage[m] < lo - tol || t_storage[m] > lim.t_max + tol) {
        return "storage layer " + std::to_string(m + 1) + " at " + std::to_string(t_storage[m]) + " degC";
      }
    }
    if (soc < -tol || soc > 1.0 + tol) return "state of charge " + std::to_string(soc);
    return {};
  }
};

}  // namespace stes::model
