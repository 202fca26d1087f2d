#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/model/system.hpp"
#include "stes/sim/integrator.hpp"
#include "stes/sim/schedule.hpp"
#include "stes/timeseries/series.hpp"

namespace stes::sim {

/// Root-mean-square error of base-10 logarithms of two positive temperature series (degC).
inline double rmsle(std::span<const double> candidate, std::span<const double> reference) {
  if (candidate.size() != reference.size()) throw DataError("rmsle: series lengths differ");
  if (candidate.empty()) throw DataError("rmsle: empty series");
  double s = 0.0;
  for (std::size_t k = 0; k < candidate.size(); ++k) {
    if (!(candidate[k] > 0.0) || !(reference[k] > 0.0)) {
      throw DomainError("rmsle: non-positive temperature sample at index " + std::to_string(k));
    }
    const double d = std::log10(candidate[k]) - std::log10(reference[k]);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(candidate.size()));
}

struct StudyConfig {
  std::vector<int> n_values{1, 2, 4, 8};
  std::vector<double> d_values{1.0, 2.0, 4.0, 8.0};
  int benchmark_n = 500;
  double benchmark_d = 100.0;
  double h = 3600.0;
  ScheduleOptions schedule;
};

struct StudyPoint {
  int n = 0;
  double d = 0.0;
  double rmsle = 0.0;
};

struct StudyResult {
  std::vector<StudyPoint> points;  // row-major over (n_values, d_values)
  std::vector<double> benchmark;   // storage temperature of the benchmark
  std::size_t n_count = 0, d_count = 0;

  double at(std::size_t i_n, std::size_t i_d) const { return points[i_n * d_count + i_d].rmsle; }
};

/// Storage temperature series of the fully mixed model for one ground mesh.
inline std::vector<double> mixed_storage_run(const model::SystemParams& base, int n, double d,
                                             const std::vector<IntervalInput>& inputs, double h, double t_start) {
  model::SystemParams sys = base;
  sys.geometry.layers = 1;
  sys.ground.layers = n;
  sys.ground.boundary_distance = d;
  ThermalStepper stepper(sys.network(), sys.dynamics());
  const auto x0 = model::SystemState::uniform(1, n, t_start, sys.ground.t_boundary);
  const auto tr = simulate(stepper, x0, inputs, h);
  auto series = tr.thermal_series(0);
  series.erase(series.begin());
  return series;
}

/// Forcing of the fully mixed study: the heat demand and the open-loop HP schedule.
inline std::vector<IntervalInput> study_inputs(const model::SystemParams& base, const std::vector<double>& q_load,
                                               const std::vector<double>& t_amb, const StudyConfig& cfg) {
  model::SystemParams sys = base;
  sys.geometry.layers = 1;
  const auto net = sys.network();
  return make_inputs(default_hp_heat(net, q_load, t_amb, cfg.h, cfg.schedule), q_load, t_amb);
}

/// RMSLE of the storage temperature against a fine, far-bounded ground mesh.
inline StudyResult discretization_study(const model::SystemParams& base, const std::vector<double>& q_load,
                                        const std::vector<double>& t_amb, const StudyConfig& cfg) {
  const auto inputs = study_inputs(base, q_load, t_amb, cfg);
  const double t_start = schedule_target(0.0, cfg.schedule);
  StudyResult res;
  res.n_count = cfg.n_values.size();
  res.d_count = cfg.d_values.size();
  res.benchmark = mixed_storage_run(base, cfg.benchmark_n, cfg.benchmark_d, inputs, cfg.h, t_start);
  for (int n : cfg.n_values) {
    for (double d : cfg.d_values) {
      const auto s = mixed_storage_run(base, n, d, inputs, cfg.h, t_start);
      res.points.push_back({n, d, rmsle(s, res.benchmark)});
    }
  }
  return res;
}

inline void write_study_csv(const std::string& path, const StudyResult& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "n,d,rmsle\n";
  char buf[96];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.n, p.d, p.rmsle);
    out << buf;
  }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  const auto& s0 = tr.states.front();
  out << "time";
  for (std::size_t m = 0; m < s0.t_storage.size(); ++m) out << ",T_s" << m + 1;
  for (std::size_t n = 0; n < s0.t_ground.size(); ++n) out << ",T_g" << n + 1;
  out << ",soc\n";
  char buf[64];
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", tr.times[k]);
    out << buf;
    const auto& s = tr.states[k];
    for (double v : s.t_storage) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    for (double v : s.t_ground) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", s.soc);
    out << buf;
  }
}

/// Measured storage operation: layer temperatures at each node and the flows of
/// each interval.
struct MeasuredOperation {
  std::vector<std::vector<double>> layer_temperatures;  // [node][layer]
  std::vector<IntervalInput> inputs;                    // one fewer than nodes
};

/// Reads `timestamp,T_s1..T_sM,q_hp,q_load,t_amb` (flows in W, applied over the
/// following hour; the last row's flows are ignored).
inline MeasuredOperation load_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open measurement file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  const auto header = ts::detail::split(line);
  int layers = 0;
  for (const auto& h : header) {
    if (h.size() > 3 && h.substr(0, 3) == "T_s") ++layers;
  }
  if (layers < 1 || header.size() != static_cast<std::size_t>(layers) + 4) {
    throw DataError("'" + path + "': header must be timestamp,T_s1..T_sM,q_hp,q_load,t_amb");
  }
  MeasuredOperation m;
  std::size_t row = 0;
  std::int64_t prev = 0;
  while (std::getline(in, line)) {
    if (ts::detail::trim(line).empty()) continue;
    ++row;
    const auto cells = ts::detail::split(line);
    const std::string where = "'" + path + "' row " + std::to_string(row);
    if (cells.size() != header.size()) throw DataError(where + ": wrong column count");
    std::int64_t epoch = 0;
    if (!ts::parse_timestamp(cells[0], epoch)) throw DataError(where + ": malformed timestamp");
    if (row > 1 && epoch - prev != 3600) throw DataError(where + ": grid mismatch (timestamps must advance by one hour)");
    prev = epoch;
    std::vector<double> v(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (!ts::detail::parse_number(cells[c], v[c - 1]) || !std::isfinite(v[c - 1])) {
        throw DataError(where + ": non-numeric value '" + std::string(cells[c]) + "'");
      }
    }
    m.layer_temperatures.emplace_back(v.begin(), v.begin() + layers);
    m.inputs.push_back({v[static_cast<std::size_t>(layers)], v[static_cast<std::size_t>(layers) + 1],
                        v[static_cast<std::size_t>(layers) + 2], 0.0, 0.0});
  }
  if (m.layer_temperatures.size() < 2) throw DataError("'" + path + "': need at least two rows");
  m.inputs.pop_back();
  return m;
}

struct ValidationReport {
  std::vector<double> layer_rmse;  // K
};

/// Simulates with the measured flows from the first measured profile
/// (ground at the boundary temperature) and reports RMSE per layer.
inline ValidationReport validate_against_measurements(const MeasuredOperation& meas, const model::SystemParams& sys) {
  const int M = sys.geometry.layers;
  for (const auto& row : meas.layer_temperatures) {
    if (static_cast<int>(row.size()) != M) {
      throw DataError("layer count mismatch: measurements have " + std::to_string(row.size()) +
                      " layers, configuration has " + std::to_string(M));
    }
  }
  ThermalStepper stepper(sys.network(), sys.dynamics());
  model::SystemState x0 = model::SystemState::uniform(M, sys.ground.layers, 0.0, sys.ground.t_boundary);
  x0.t_storage = meas.layer_temperatures.front();
  const auto tr = simulate(stepper, x0, meas.inputs, 3600.0);
  ValidationReport rep;
  rep.layer_rmse.assign(static_cast<std::size_t>(M), 0.0);
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    for (int m = 0; m < M; ++m) {
      const double e = tr.states[k].t_storage[static_cast<std::size_t>(m)] - meas.layer_temperatures[k][static_cast<std::size_t>(m)];
      rep.layer_rmse[static_cast<std::size_t>(m)] += e * e;
    }
  }
  for (double& v : rep.layer_rmse) v = std::sqrt(v / static_cast<double>(tr.states.size()));
  return rep;
}

inline void write_measurements_csv(const std::string& path, const Trajectory& tr, std::int64_t start_epoch = 0) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  const std::size_t M = tr.states.front().t_storage.size();
  out << "timestamp";
  for (std::size_t m = 0; m < M; ++m) out << ",T_s" << m + 1;
  out << ",q_hp,q_load,t_amb\n";
  char buf[64];
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    out << ts::format_timestamp(start_epoch + static_cast<std::int64_t>(k) * 3600);
    for (double v : tr.states[k].t_storage) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    const IntervalInput in = k < tr.inputs.size() ? tr.inputs[k] : IntervalInput{};
    std::snprintf(buf, sizeof(buf), ",%.17g", in.q_hp);
    out << buf;
    std::snprintf(buf, sizeof(buf), ",%.17g", in.q_load);
    out << buf;
    std::snprintf(buf, sizeof(buf), ",%.17g\n", in.t_amb);
    out << buf;
  }
}

}  // namespace stes::sim
