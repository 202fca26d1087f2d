#pragma once

// Open-loop heat-pump schedule for simulation studies: the heat that keeps the
// mean storage temperature on a seasonal sinusoid, given the heat demand.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stes/model/network.hpp"
#include "stes/sim/integrator.hpp"

namespace stes::sim {

struct ScheduleOptions {
  double mean_temperature = 52.0;
  double amplitude = 18.0;
  double peak_day = 260.0;  // day of year of the warmest storage
};

inline double schedule_target(double t_seconds, const ScheduleOptions& o) {
  const double day = t_seconds / 86400.0;
  return o.mean_temperature + o.amplitude * std::cos(2.0 * std::numbers::pi * (day - o.peak_day) / 365.0);
}

/// Per-interval HP heat (W) for a target trajectory of the mean storage temperature.
inline std::vector<double> default_hp_heat(const ThermalNetwork& net, const std::vector<double>& q_load,
                                           const std::vector<double>& t_amb, double h, const ScheduleOptions& o = {}) {
  double c_total = 0.0;
  for (double c : net.c_storage) c_total += c;
  double g_wall = 0.0;
  for (double g : net.g_wall_ground) g_wall += g;
  double r_series = 1.0 / g_wall;
  for (double g : net.g_ground) r_series += 1.0 / g;
  const double g_loss = 1.0 / r_series;

  std::vector<double> q(q_load.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double t0 = h * static_cast<double>(k), t1 = t0 + h;
    const double target = schedule_target(t1, o);
    const double rate = (target - schedule_target(t0, o)) / h;
    const double need = c_total * rate + q_load[k] + net.g_top * (target - t_amb[k]) + g_loss * (target - net.t_boundary);
    q[k] = std::max(0.0, need);
  }
  return q;
}

inline std::vector<IntervalInput> make_inputs(const std::vector<double>& q_hp, const std::vector<double>& q_load,
                                              const std::vector<double>& t_amb) {
  std::vector<IntervalInput> in(q_hp.size());
  for (std::size_t k = 0; k < in.size(); ++k) in[k] = {q_hp[k], q_load[k], t_amb[k], 0.0, 0.0};
  return in;
}

}  // namespace stes::sim
