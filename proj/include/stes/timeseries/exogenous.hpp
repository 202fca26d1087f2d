#pragma once

#include <string>

#include "stes/core/error.hpp"
#include "stes/timeseries/series.hpp"

namespace stes::ts {

/// The five exogenous hourly profiles of a scenario. PV and wind are given at
/// the default installed capacities.
struct ExogenousData {
  HourlySeries t_amb;   // degC
  HourlySeries p_pv0;   // W
  HourlySeries p_wind0; // W
  HourlySeries p_load;  // W electricity demand
  HourlySeries q_load;  // W heating demand

  std::size_t size() const { return t_amb.size(); }

  void validate() const {
    require_same_length(t_amb, p_pv0, "exogenous data (pv)");
    require_same_length(t_amb, p_wind0, "exogenous data (wind)");
    require_same_length(t_amb, p_load, "exogenous data (electric load)");
    require_same_length(t_amb, q_load, "exogenous data (heat load)");
    if (t_amb.unit() != Unit::Celsius) throw DataError("ambient temperature must be in degC");
    for (const auto* s : {&p_pv0, &p_wind0, &p_load, &q_load}) {
      if (s->unit() != Unit::Watt) throw DataError("power profiles must be in W");
    }
  }

  ExogenousData slice(std::size_t first, std::size_t count) const {
    return {t_amb.slice(first, count), p_pv0.slice(first, count), p_wind0.slice(first, count),
            p_load.slice(first, count), q_load.slice(first, count)};
  }
};

}  // namespace stes::ts
