#pragma once

#include "stes/model/dynamics.hpp"
#include "stes/model/network.hpp"
#include "stes/model/params.hpp"

namespace stes::model {

/// All physical parameter blocks of one energy system.
struct SystemParams {
  StorageGeometry geometry;
  GroundMesh ground;
  ThermalParams thermal;
  HeatPumpParams heat_pump;
  BatteryParams battery;
  OperatingLimits limits;

  void validate() const {
    geometry.validate();
    ground.validate();
    thermal.validate();
    heat_pump.validate(limits.t_max);
    battery.validate();
    if (!(limits.t_min < limits.t_top_min && limits.t_top_min < limits.t_max)) {
      throw ConfigError("operating limits: need t_min < t_top_min < t_max");
    }
    if (!(limits.supply_return_spread > 0.0)) throw ConfigError("operating limits: spread must be positive");
  }

  ThermalNetwork network(double s_s = 1.0) const { return derive_network(geometry, ground, thermal, s_s); }
  DynamicsConfig dynamics() const { return DynamicsConfig::from(heat_pump, limits); }
  int thermal_states() const { return geometry.layers + ground.layers; }
};

}  // namespace stes::model
