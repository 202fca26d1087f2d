#pragma once

// Scenario orchestration: data -> transcription -> solve -> economics, and the
// result files of single runs, variant comparisons, price sweeps and the
// full-vs-averaged benchmark.
//
// JSON result files are deterministic for a given configuration. Wall times and
// creation times go to separate *_meta.json / *_timing.json files.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stes/core/error.hpp"
#include "stes/econ/cost.hpp"
#include "stes/econ/report.hpp"
#include "stes/scenario/config.hpp"
#include "stes/sim/analysis.hpp"
#include "stes/sim/schedule.hpp"
#include "stes/solve/ipm.hpp"
#include "stes/solve/report.hpp"
#include "stes/transcribe/energy_nlp.hpp"
#include "stes/transcribe/summary.hpp"

namespace stes::scenario {

using json = nlohmann::ordered_json;

/// Runs f and prefixes any library error with the stage name, keeping its type.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(name + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(name + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(name + ": " + e.what());
  }
}

/// Calls f(i) for i in [0, n) on up to hardware_concurrency threads.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- solving -----------------------------------------------------------------------------

struct StartRecord {
  std::string status;
  double objective = 0.0;
  int iterations = 0;
};

struct SolveOutcome {
  std::shared_ptr<const transcribe::EnergyNlp> nlp;
  solve::SolveResult result;
  transcribe::Solution solution;
  int start = 0;
  std::vector<StartRecord> starts;
  double wall_time = 0.0;  // all starts
};

/// Start 0 is the flat default point; later starts draw storage and ground
/// temperatures and design scales from the seeded generator.
inline std::vector<double> start_point(const transcribe::EnergyNlp& nlp, int index, std::uint64_t seed) {
  if (index == 0) return nlp.initial_guess();
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> t_s(25.0, 70.0), t_g(13.5, 25.0), scale(0.5, 2.0);
  const double ts0 = t_s(rng), tg0 = t_g(rng);
  auto x = nlp.initial_guess(ts0, tg0);
  const auto at = [&](int i) -> double& { return x[static_cast<std::size_t>(i)]; };
  for (int c = 0; c < model::DesignVector::kSize; ++c) {
    const int i = nlp.theta_index(c);
    at(i) = std::clamp(scale(rng), nlp.x_lower()[static_cast<std::size_t>(i)], nlp.x_upper()[static_cast<std::size_t>(i)]);
  }
  if (nlp.has_battery()) {
    for (int k = 0; k <= nlp.fine_intervals(); ++k) at(nlp.soc_index(k)) = 0.5 * at(nlp.theta_index(2));
  }
  return x;
}

inline const char* form_name(transcribe::Form f) { return f == transcribe::Form::full ? "full" : "averaged"; }

inline SolveOutcome solve_problem(transcribe::ProblemSpec spec, transcribe::Form form, const ScenarioConfig& cfg) {
  const std::string what = std::string(form_name(form)) + " NLP, variant " + transcribe::to_string(spec.variant);
  SolveOutcome out;
  out.nlp = stage("transcribe", [&] { return std::make_shared<const transcribe::EnergyNlp>(std::move(spec), form); });
  const auto t0 = std::chrono::steady_clock::now();
  bool have = false;
  solve::SolveResult first;
  for (int i = 0; i < cfg.multi_start; ++i) {
    auto r = solve::solve(*out.nlp, start_point(*out.nlp, i, cfg.seed), cfg.solver);
    out.starts.push_back({solve::to_string(r.status), r.objective, r.iterations});
    if (r.status == solve::Status::optimal && (!have || r.objective < out.result.objective)) {
      out.result = std::move(r);
      out.start = i;
      have = true;
    } else if (i == 0) {
      first = std::move(r);
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!have) {
    throw SolverError("solve: " + what + " ended with status '" + solve::to_string(first.status) + "' (" +
                      first.message + ") from all " + std::to_string(cfg.multi_start) + " start(s)");
  }
  out.solution = out.nlp->extract(out.result.x);
  return out;
}

// ---- audits and metrics -------------------------------------------------------------------

/// Largest electrical balance residual over the fine intervals, in MW.
inline double power_balance_residual(const transcribe::EnergyNlp& nlp, const transcribe::Solution& s) {
  const auto& d = nlp.spec().data;
  double r = 0.0;
  for (std::size_t k = 0; k < s.controls.size(); ++k) {
    const double p_re = s.design.s_pv * d.p_pv0[k] + s.design.s_wind * d.p_wind0[k];
    r = std::max(r, std::abs(model::power_balance_residual(s.controls[k], p_re, d.p_load[k])) / transcribe::kPowerScale);
  }
  return r;
}

struct ThermalAudit {
  bool available = false;
  double stored_change = 0.0;  // J
  double integrated_gain = 0.0;
  double hp_in = 0.0;
  double load_out = 0.0;
  double losses = 0.0;

  double relative_error() const {
    const double scale = std::max({std::abs(hp_in), std::abs(load_out), std::abs(losses), 1.0});
    return std::abs(stored_change - integrated_gain) / scale;
  }
};

/// Year energy balance of the optimized thermal trajectory: change of stored
/// heat against the boundary flows at the end of each thermal interval.
inline ThermalAudit thermal_audit(const transcribe::EnergyNlp& nlp, const transcribe::Solution& s) {
  ThermalAudit a;
  if (!nlp.has_storage()) return a;
  a.available = true;
  const auto net = nlp.spec().system.network(s.design.s_s);
  std::vector<double> p_hp;
  for (const auto& u : s.controls) p_hp.push_back(u.p_hp);
  const auto q = nlp.thermal_heat(p_hp);
  const auto forcing = nlp.thermal_forcing();
  const double h = s.thermal_step;
  a.stored_change = model::stored_heat(s.temperatures.back(), net) - model::stored_heat(s.temperatures.front(), net);
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto f = model::boundary_flows(s.temperatures[j + 1], q[j], forcing[j], net);
    a.integrated_gain += h * f.net_gain();
    a.hp_in += h * f.hp_in;
    a.load_out += h * f.load_out;
    a.losses += h * (f.top_loss + f.boundary_loss);
  }
  return a;
}

struct SolutionMetrics {
  econ::CostBreakdown cost;
  double autonomy = 0.0;
  econ::StorageEfficiency storage_efficiency;
  double power_balance = 0.0;  // MW
  ThermalAudit audit;
  std::vector<double> grid_import, grid_export;  // W, netted per interval
};

inline SolutionMetrics evaluate(const SolveOutcome& o) {
  const auto& nlp = *o.nlp;
  const auto& s = o.solution;
  const auto& spec = nlp.spec();
  SolutionMetrics m;
  std::vector<double> p_hp, p_load;
  for (std::size_t k = 0; k < s.controls.size(); ++k) {
    const auto& u = s.controls[k];
    const double net_import = u.p_grid_plus - u.p_grid_minus;
    m.grid_import.push_back(std::max(0.0, net_import));
    m.grid_export.push_back(std::max(0.0, -net_import));
    p_hp.push_back(u.p_hp);
    p_load.push_back(spec.data.p_load[k]);
  }
  m.cost = econ::make_breakdown(s.design, nlp.capacities(), spec.costs, m.grid_import, m.grid_export, spec.grid.h_fine);
  const double annualize = transcribe::kSecondsPerYear / spec.grid.horizon();
  m.cost.grid_import *= annualize;
  m.cost.grid_export *= annualize;
  m.autonomy = econ::autonomy(p_hp, p_load, m.grid_import);
  if (nlp.has_storage()) {
    std::vector<double> q_out(spec.data.q_load.values().begin(), spec.data.q_load.values().end());
    m.storage_efficiency = econ::storage_efficiency(s.q_hp, q_out, spec.grid.h_fine);
  } else {
    m.storage_efficiency.note = "undefined: no thermal storage";
  }
  m.power_balance = power_balance_residual(nlp, s);
  m.audit = thermal_audit(nlp, s);
  return m;
}

// ---- result files -------------------------------------------------------------------------

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw DataError("cannot write '" + p.string() + "'");
  return f;
}

inline void write_json(const std::filesystem::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

inline std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// Thermal state at fine node k; averaged solutions are interpolated linearly
/// between their daily nodes.
inline std::vector<double> thermal_at(const transcribe::EnergyNlp& nlp, const transcribe::Solution& s, int k) {
  if (nlp.form() == transcribe::Form::full) return s.temperatures[static_cast<std::size_t>(k)];
  const int w = nlp.spec().grid.k;
  const auto j = static_cast<std::size_t>(k / w);
  const double r = static_cast<double>(k % w) / w;
  if (r == 0.0) return s.temperatures[j];
  std::vector<double> t(s.temperatures[j].size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - r) * s.temperatures[j][i] + r * s.temperatures[j + 1][i];
  return t;
}

inline std::string thermal_header(const transcribe::EnergyNlp& nlp, const std::string& prefix = "") {
  std::string h;
  if (!nlp.has_storage()) return h;
  for (int m = 0; m < nlp.storage_layers(); ++m) h += "," + prefix + "T_s" + std::to_string(m + 1);
  for (int n = 0; n < nlp.ground_layers(); ++n) h += "," + prefix + "T_g" + std::to_string(n + 1);
  return h;
}

inline json design_json(const model::DesignVector& d) {
  return {{"s_pv", d.s_pv}, {"s_wind", d.s_wind}, {"s_b", d.s_b}, {"s_s", d.s_s}, {"s_hp", d.s_hp}};
}

}  // namespace detail

/// One row per fine node: time (h), storage and ground temperatures, soc.
inline void write_solution_trajectory(const std::filesystem::path& p, const SolveOutcome& o) {
  const auto& nlp = *o.nlp;
  auto f = detail::open_out(p);
  f << "time_h" << detail::thermal_header(nlp) << (nlp.has_battery() ? ",soc" : "") << '\n';
  for (int k = 0; k <= nlp.fine_intervals(); ++k) {
    f << k;
    if (nlp.has_storage()) {
      for (double t : detail::thermal_at(nlp, o.solution, k)) f << ',' << detail::num(t);
    }
    if (nlp.has_battery()) f << ',' << detail::num(o.solution.soc[static_cast<std::size_t>(k)]);
    f << '\n';
  }
}

/// Per fine interval, in MW: controls, HP heat, generation and demand.
inline void write_controls(const std::filesystem::path& p, const SolveOutcome& o) {
  const auto& d = o.nlp->spec().data;
  const auto& s = o.solution;
  auto f = detail::open_out(p);
  f << "time_h,P_hp,Q_hp,P_b_plus,P_b_minus,P_grid_plus,P_grid_minus,P_pv,P_wind,P_load,Q_load\n";
  const double mw = 1e-6;
  for (std::size_t k = 0; k < s.controls.size(); ++k) {
    const auto& u = s.controls[k];
    const double vals[] = {u.p_hp, s.q_hp[k], u.p_b_plus, u.p_b_minus, u.p_grid_plus, u.p_grid_minus,
                           s.design.s_pv * d.p_pv0[k], s.design.s_wind * d.p_wind0[k], d.p_load[k], d.q_load[k]};
    f << k;
    for (double v : vals) f << ',' << detail::num(v * mw);
    f << '\n';
  }
}

/// Temperature trajectories at the thermal nodes of the solved form (days).
inline void write_temperature_figure(const std::filesystem::path& p, const SolveOutcome& o) {
  const auto& nlp = *o.nlp;
  auto f = detail::open_out(p);
  f << "time_d" << detail::thermal_header(nlp) << '\n';
  for (std::size_t j = 0; j < o.solution.temperatures.size(); ++j) {
    f << detail::num(static_cast<double>(j) * o.solution.thermal_step / 86400.0);
    for (double t : o.solution.temperatures[j]) f << ',' << detail::num(t);
    f << '\n';
  }
}

/// Full and averaged solutions side by side on the fine grid.
inline void write_overlay_figure(const std::filesystem::path& p, const SolveOutcome& full, const SolveOutcome& avg) {
  auto f = detail::open_out(p);
  f << "time_h" << detail::thermal_header(*full.nlp, "full_") << detail::thermal_header(*avg.nlp, "averaged_")
    << ",full_P_hp,averaged_P_hp\n";
  const int n = full.nlp->fine_intervals();
  for (int k = 0; k <= n; ++k) {
    f << k;
    for (const auto* o : {&full, &avg}) {
      if (o->nlp->has_storage()) {
        for (double t : detail::thermal_at(*o->nlp, o->solution, k)) f << ',' << detail::num(t);
      }
    }
    for (const auto* o : {&full, &avg}) {
      f << ',';
      if (k < n) f << detail::num(o->solution.controls[static_cast<std::size_t>(k)].p_hp * 1e-6);
    }
    f << '\n';
  }
}

/// Weekly energy sums (MWh); the last week may be shorter.
inline void write_weekly_figures(const std::filesystem::path& demand_path, const std::filesystem::path& gen_path,
                                 const SolveOutcome& o, const SolutionMetrics& m) {
  const auto& d = o.nlp->spec().data;
  const auto& s = o.solution;
  const double mwh = o.nlp->spec().grid.h_fine / 3600.0 * 1e-6;
  auto fd = detail::open_out(demand_path);
  auto fg = detail::open_out(gen_path);
  fd << "week,hours,electricity_load_mwh,hp_electricity_mwh,heat_load_mwh,hp_heat_mwh\n";
  fg << "week,hours,pv_mwh,wind_mwh,grid_import_mwh,grid_export_mwh,battery_charge_mwh,battery_discharge_mwh\n";
  const std::size_t n = s.controls.size();
  for (std::size_t w0 = 0, week = 0; w0 < n; w0 += 168, ++week) {
    const std::size_t w1 = std::min(n, w0 + 168);
    double dem[4] = {}, gen[6] = {};
    for (std::size_t k = w0; k < w1; ++k) {
      const auto& u = s.controls[k];
      dem[0] += d.p_load[k];
      dem[1] += u.p_hp;
      dem[2] += d.q_load[k];
      dem[3] += s.q_hp[k];
      gen[0] += s.design.s_pv * d.p_pv0[k];
      gen[1] += s.design.s_wind * d.p_wind0[k];
      gen[2] += m.grid_import[k];
      gen[3] += m.grid_export[k];
      gen[4] += u.p_b_plus;
      gen[5] += u.p_b_minus;
    }
    fd << week << ',' << w1 - w0;
    for (double v : dem) fd << ',' << detail::num(v * mwh);
    fd << '\n';
    fg << week << ',' << w1 - w0;
    for (double v : gen) fg << ',' << detail::num(v * mwh);
    fg << '\n';
  }
}

struct PricePoint {
  double price = 0.0;
  std::string variant;
  double yearly_total = 0.0;
  double eur_per_m2 = 0.0;
  double autonomy = 0.0;
};

inline void write_price_figure(const std::filesystem::path& p, const std::vector<PricePoint>& rows) {
  auto f = detail::open_out(p);
  f << "price_eur_per_kwh,variant,yearly_total_eur,eur_per_m2_year,autonomy\n";
  for (const auto& r : rows) {
    f << detail::num(r.price) << ',' << r.variant << ',' << detail::num(r.yearly_total) << ','
      << detail::num(r.eur_per_m2) << ',' << detail::num(r.autonomy) << '\n';
  }
}

inline json metrics_json(const SolutionMetrics& m) {
  json j;
  j["autonomy"] = m.autonomy;
  j["storage_efficiency"] = m.storage_efficiency.value ? json(*m.storage_efficiency.value) : json(nullptr);
  if (!m.storage_efficiency.note.empty()) j["storage_efficiency_note"] = m.storage_efficiency.note;
  j["heat_charged_mwh"] = m.storage_efficiency.heat_in_wh * 1e-6;
  j["heat_discharged_mwh"] = m.storage_efficiency.heat_out_wh * 1e-6;
  j["power_balance_max_mw"] = m.power_balance;
  if (m.audit.available) {
    j["thermal_audit"] = {{"stored_change_j", m.audit.stored_change},
                          {"integrated_gain_j", m.audit.integrated_gain},
                          {"relative_error", m.audit.relative_error()}};
  } else {
    j["thermal_audit"] = nullptr;
  }
  j["yearly_total_eur"] = m.cost.yearly_total();
  j["eur_per_m2_year"] = m.cost.cost_per_m2();
  return j;
}

inline json outcome_json(const SolveOutcome& o, const SolutionMetrics& m) {
  json j;
  j["problem"] = transcribe::problem_summary(*o.nlp);
  j["result"] = solve::to_json(o.result, false);
  j["objective_eur"] = o.nlp->objective_eur(o.result.x);
  j["design"] = detail::design_json(o.solution.design);
  j["metrics"] = metrics_json(m);
  auto starts = json::array();
  for (const auto& s : o.starts) starts.push_back({{"status", s.status}, {"objective", s.objective}, {"iterations", s.iterations}});
  j["multi_start"] = {{"chosen", o.start}, {"starts", starts}};
  return j;
}

inline json timing_json(const SolveOutcome& o) {
  json j = solve::timing_json(o.result);
  j["all_starts_wall_time_s"] = o.wall_time;
  return j;
}

// ---- runs ---------------------------------------------------------------------------------

struct ScenarioResult {
  SolveOutcome primary;
  std::optional<SolveOutcome> other;  // the other form, when the overlay is enabled
  SolutionMetrics metrics;
};

inline transcribe::Form other_form(transcribe::Form f) {
  return f == transcribe::Form::full ? transcribe::Form::averaged : transcribe::Form::full;
}

inline ts::ExogenousData load_scenario_data(const ScenarioConfig& cfg) {
  return stage("load data", [&] {
    auto d = load_data(cfg);
    d.validate();
    return d;
  });
}

/// Solves one configuration and writes its result files into `dir`.
inline ScenarioResult run_scenario_in(const ScenarioConfig& cfg, const ts::ExogenousData& data,
                                      const std::filesystem::path& dir, bool overlay) {
  ScenarioResult r;
  r.primary = solve_problem(problem_spec(cfg, data), cfg.form, cfg);
  if (overlay) r.other = solve_problem(problem_spec(cfg, data), other_form(cfg.form), cfg);
  r.metrics = stage("economics", [&] { return evaluate(r.primary); });
  stage("write results", [&] {
    std::filesystem::create_directories(dir);
    write_solution_trajectory(dir / "trajectory.csv", r.primary);
    write_controls(dir / "controls.csv", r.primary);
    detail::write_json(dir / "solve.json", outcome_json(r.primary, r.metrics));
    json meta;
    meta["created"] = detail::timestamp_now();
    meta["timing"] = timing_json(r.primary);
    if (r.other) meta["overlay_timing"] = timing_json(*r.other);
    meta["history"] = solve::history_json(r.primary.result);
    detail::write_json(dir / "solve_meta.json", meta);
    detail::write_json(dir / "cost.json", econ::to_json(r.metrics.cost));
    detail::open_out(dir / "cost.txt") << econ::render_table({{transcribe::to_string(cfg.variant), r.metrics.cost}});
    write_temperature_figure(dir / "fig_temperatures.csv", r.primary);
    if (r.other) {
      const bool full_first = cfg.form == transcribe::Form::full;
      write_overlay_figure(dir / "fig_overlay.csv", full_first ? r.primary : *r.other, full_first ? *r.other : r.primary);
    }
    write_weekly_figures(dir / "fig_weekly_demand.csv", dir / "fig_weekly_generation.csv", r.primary, r.metrics);
    write_price_figure(dir / "fig_cost_vs_price.csv",
                       {{cfg.costs.c_buy, transcribe::to_string(cfg.variant), r.metrics.cost.yearly_total(),
                         r.metrics.cost.cost_per_m2(), r.metrics.autonomy}});
    return 0;
  });
  return r;
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  return run_scenario_in(cfg, data, cfg.output.dir, cfg.output.overlay);
}

struct ComparisonEntry {
  transcribe::Variant variant;
  ScenarioResult result;
  double delta = 0.0;  // relative yearly-total change against the first entry
};

/// Solves each variant (in parallel) and writes a side-by-side table with
/// relative total-cost deltas against the first variant.
inline std::vector<ComparisonEntry> run_comparison(const ScenarioConfig& cfg,
                                                   const std::vector<transcribe::Variant>& variants) {
  stage("config", [&] {
    cfg.validate();
    if (variants.size() < 2) throw ConfigError("compare: need at least two variants");
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  std::vector<ComparisonEntry> out(variants.size());
  const std::filesystem::path dir = cfg.output.dir;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    std::string name = transcribe::to_string(variants[i]);
    if (std::count(variants.begin(), variants.end(), variants[i]) > 1) name += "_" + std::to_string(i + 1);
    names.push_back(name);
  }
  parallel_for(variants.size(), [&](std::size_t i) {
    ScenarioConfig c = cfg;
    c.variant = variants[i];
    out[i].variant = variants[i];
    out[i].result = run_scenario_in(c, data, dir / names[i], false);
  });
  const double base = out.front().result.metrics.cost.yearly_total();
  for (auto& e : out) e.delta = (e.result.metrics.cost.yearly_total() - base) / base;

  stage("write results", [&] {
    json j;
    j["baseline"] = transcribe::to_string(variants.front());
    auto arr = json::array();
    std::vector<std::pair<std::string, econ::CostBreakdown>> cols;
    std::string deltas;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& e = out[i];
      const std::string& name = names[i];
      arr.push_back({{"variant", name},
                     {"yearly_total_eur", e.result.metrics.cost.yearly_total()},
                     {"relative_delta", e.delta},
                     {"eur_per_m2_year", e.result.metrics.cost.cost_per_m2()},
                     {"autonomy", e.result.metrics.autonomy},
                     {"design", detail::design_json(e.result.primary.solution.design)},
                     {"cost", econ::to_json(e.result.metrics.cost)}});
      cols.emplace_back(name, e.result.metrics.cost);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-10s yearly total %14.2f EUR  delta %+8.2f %%\n", name.c_str(),
                    e.result.metrics.cost.yearly_total(), 100.0 * e.delta);
      deltas += buf;
    }
    j["variants"] = arr;
    detail::write_json(dir / "comparison.json", j);
    detail::open_out(dir / "comparison.txt") << econ::render_table(cols) << '\n' << deltas;
    return 0;
  });
  return out;
}

struct SweepEntry {
  double price = 0.0;
  SolveOutcome outcome;
  SolutionMetrics metrics;
  std::optional<SolutionMetrics> only_hp;
};

/// Total cost and autonomy of the configured variant for each electricity
/// price, with the grid-only heat pump as comparator.
inline std::vector<SweepEntry> run_price_sweep(const ScenarioConfig& cfg, const std::vector<double>& prices,
                                               bool with_only_hp = true) {
  stage("config", [&] {
    cfg.validate();
    if (prices.empty()) throw ConfigError("sweep: need at least one price");
    for (double p : prices) {
      if (!(p > 0.0)) throw ConfigError("sweep: prices must be positive");
    }
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  const bool comparator = with_only_hp && cfg.variant != transcribe::Variant::only_hp;
  const std::size_t jobs = prices.size() * (comparator ? 2 : 1);
  std::vector<SweepEntry> out(prices.size());
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t i = job % prices.size();
    ScenarioConfig c = cfg;
    c.costs.c_buy = prices[i];
    if (job >= prices.size()) c.variant = transcribe::Variant::only_hp;
    auto o = solve_problem(problem_spec(c, data), c.form, c);
    auto m = stage("economics", [&] { return evaluate(o); });
    if (job >= prices.size()) {
      out[i].only_hp = std::move(m);
    } else {
      out[i].price = prices[i];
      out[i].outcome = std::move(o);
      out[i].metrics = std::move(m);
    }
  });

  stage("write results", [&] {
    const std::filesystem::path dir = cfg.output.dir;
    std::filesystem::create_directories(dir);
    std::vector<PricePoint> rows;
    json j;
    j["variant"] = transcribe::to_string(cfg.variant);
    auto arr = json::array();
    for (const auto& e : out) {
      json row = {{"price_eur_per_kwh", e.price},
                  {"status", solve::to_string(e.outcome.result.status)},
                  {"yearly_total_eur", e.metrics.cost.yearly_total()},
                  {"eur_per_m2_year", e.metrics.cost.cost_per_m2()},
                  {"autonomy", e.metrics.autonomy},
                  {"design", detail::design_json(e.outcome.solution.design)}};
      rows.push_back({e.price, transcribe::to_string(cfg.variant), e.metrics.cost.yearly_total(),
                      e.metrics.cost.cost_per_m2(), e.metrics.autonomy});
      if (e.only_hp) {
        row["only_hp"] = {{"yearly_total_eur", e.only_hp->cost.yearly_total()},
                          {"eur_per_m2_year", e.only_hp->cost.cost_per_m2()},
                          {"autonomy", e.only_hp->autonomy}};
        rows.push_back({e.price, "only-hp", e.only_hp->cost.yearly_total(), e.only_hp->cost.cost_per_m2(),
                        e.only_hp->autonomy});
      }
      arr.push_back(row);
    }
    j["prices"] = arr;
    detail::write_json(dir / "sweep.json", j);
    write_price_figure(dir / "fig_cost_vs_price.csv", rows);
    return 0;
  });
  return out;
}

/// NRMSE = RMSE / (max - min) of the reference. Zero when both agree and the
/// reference is flat.
inline double nrmse(std::span<const double> reference, std::span<const double> candidate) {
  if (reference.size() != candidate.size() || reference.empty()) throw DataError("nrmse: series lengths differ");
  double s = 0.0, lo = reference[0], hi = reference[0];
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double e = candidate[i] - reference[i];
    s += e * e;
    lo = std::min(lo, reference[i]);
    hi = std::max(hi, reference[i]);
  }
  const double rmse = std::sqrt(s / static_cast<double>(reference.size()));
  const double range = hi - lo;
  const double scale = std::max({1.0, std::abs(hi), std::abs(lo)});
  if (range <= 1e-12 * scale) return rmse <= 1e-9 * scale ? 0.0 : INFINITY;
  return rmse / range;
}

struct BenchmarkResult {
  SolveOutcome full, averaged;
  double max_design_deviation = 0.0;
  double nrmse_p_hp = 0.0;
  double nrmse_t_g1 = 0.0;
  double time_ratio = 0.0;  // total wall time full / averaged
};

inline double max_design_deviation(const model::DesignVector& reference, const model::DesignVector& candidate) {
  const auto a = reference.as_array(), b = candidate.as_array();
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) > 1e-9) dev = std::max(dev, std::abs(b[i] - a[i]) / std::abs(a[i]));
  }
  return dev;
}

inline BenchmarkResult compare_forms(SolveOutcome full, SolveOutcome avg) {
  BenchmarkResult b;
  b.full = std::move(full);
  b.averaged = std::move(avg);
  b.max_design_deviation = max_design_deviation(b.full.solution.design, b.averaged.solution.design);
  std::vector<double> pf, pa;
  for (std::size_t k = 0; k < b.full.solution.controls.size(); ++k) {
    pf.push_back(b.full.solution.controls[k].p_hp);
    pa.push_back(b.averaged.solution.controls[k].p_hp);
  }
  b.nrmse_p_hp = nrmse(pf, pa);
  if (b.full.nlp->has_storage()) {
    const int M = b.full.nlp->storage_layers();
    const int K = b.full.nlp->spec().grid.k;
    std::vector<double> tf, ta;
    for (std::size_t j = 0; j < b.averaged.solution.temperatures.size(); ++j) {
      tf.push_back(b.full.solution.temperatures[j * static_cast<std::size_t>(K)][static_cast<std::size_t>(M)]);
      ta.push_back(b.averaged.solution.temperatures[j][static_cast<std::size_t>(M)]);
    }
    b.nrmse_t_g1 = nrmse(tf, ta);
  }
  b.time_ratio = b.full.result.wall_time / b.averaged.result.wall_time;
  return b;
}

inline json benchmark_json(const BenchmarkResult& b) {
  json j;
  for (const auto* o : {&b.full, &b.averaged}) {
    const auto& nlp = *o->nlp;
    j[form_name(nlp.form())] = {{"variables", nlp.n()},
                                {"node_exclusive_formula", nlp.formula_variable_count()},
                                {"constraints", nlp.m()},
                                {"iterations", o->result.iterations},
                                {"status", solve::to_string(o->result.status)},
                                {"objective_eur", nlp.objective_eur(o->result.x)},
                                {"design", detail::design_json(o->solution.design)}};
  }
  j["deviation"] = {{"max_relative_design", b.max_design_deviation},
                    {"nrmse_p_hp", b.nrmse_p_hp},
                    {"nrmse_t_g1", b.nrmse_t_g1}};
  return j;
}

inline json benchmark_timing_json(const BenchmarkResult& b) {
  json j;
  j["created"] = detail::timestamp_now();
  j["full"] = solve::timing_json(b.full.result);
  j["averaged"] = solve::timing_json(b.averaged.result);
  j["total_time_ratio_full_over_averaged"] = b.time_ratio;
  j["time_reduction"] = 1.0 - 1.0 / b.time_ratio;
  return j;
}

/// Solves the full and the averaged NLP of the same configuration one after the
/// other (timings are not disturbed by a concurrent solve) and compares them.
inline BenchmarkResult run_averaging_benchmark(const ScenarioConfig& cfg) {
  stage("config", [&] {
    ScenarioConfig c = cfg;
    c.form = transcribe::Form::averaged;
    c.validate();
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  auto full = solve_problem(problem_spec(cfg, data), transcribe::Form::full, cfg);
  auto avg = solve_problem(problem_spec(cfg, data), transcribe::Form::averaged, cfg);
  auto b = compare_forms(std::move(full), std::move(avg));
  stage("write results", [&] {
    const std::filesystem::path dir = cfg.output.dir;
    std::filesystem::create_directories(dir);
    detail::write_json(dir / "bench_averaging.json", benchmark_json(b));
    detail::write_json(dir / "bench_averaging_timing.json", benchmark_timing_json(b));
    write_overlay_figure(dir / "fig_overlay.csv", b.full, b.averaged);
    return 0;
  });
  return b;
}

// ---- simulation commands ------------------------------------------------------------------

struct SimulationRun {
  sim::Trajectory trajectory;
  sim::PeriodicResult periodic;
  sim::EnergyAudit audit;
};

/// Year-periodic open-loop simulation of the storage under the default heat-pump
/// schedule, at design scale 1.
inline SimulationRun run_simulation(const ScenarioConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  return stage("simulate", [&] {
    const auto net = cfg.system.network();
    std::vector<double> q_load(data.q_load.values().begin(), data.q_load.values().end());
    std::vector<double> t_amb(data.t_amb.values().begin(), data.t_amb.values().end());
    const double h = cfg.grid.h_fine;
    const auto inputs = sim::make_inputs(sim::default_hp_heat(net, q_load, t_amb, h, cfg.study.schedule), q_load, t_amb);
    sim::ThermalStepper stepper(net, cfg.system.dynamics());
    const auto guess = model::SystemState::uniform(cfg.system.geometry.layers, cfg.system.ground.layers,
                                                   sim::schedule_target(0.0, cfg.study.schedule),
                                                   cfg.system.ground.t_boundary);
    SimulationRun r;
    r.periodic = sim::periodic_steady_state(stepper, guess, inputs, h);
    r.trajectory = sim::simulate(stepper, r.periodic.state, inputs, h);
    r.audit = sim::energy_audit(r.trajectory, net);
    const std::filesystem::path dir = cfg.output.dir;
    std::filesystem::create_directories(dir);
    sim::write_trajectory_csv((dir / "sim_trajectory.csv").string(), r.trajectory);
    detail::write_json(dir / "sim_summary.json",
                       {{"years_to_periodic", r.periodic.years},
                        {"periodic_mismatch_k", r.periodic.mismatch},
                        {"stored_change_j", r.audit.stored_change},
                        {"integrated_gain_j", r.audit.integrated_gain},
                        {"hp_in_j", r.audit.hp_in},
                        {"load_out_j", r.audit.load_out},
                        {"losses_j", r.audit.losses},
                        {"audit_relative_error", r.audit.relative_error()}});
    return r;
  });
}

inline sim::StudyResult run_study(const ScenarioConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const auto data = load_scenario_data(cfg);
  return stage("discretization study", [&] {
    std::vector<double> q_load(data.q_load.values().begin(), data.q_load.values().end());
    std::vector<double> t_amb(data.t_amb.values().begin(), data.t_amb.values().end());
    auto r = sim::discretization_study(cfg.system, q_load, t_amb, cfg.study);
    std::filesystem::create_directories(cfg.output.dir);
    sim::write_study_csv((std::filesystem::path(cfg.output.dir) / "study.csv").string(), r);
    return r;
  });
}

inline sim::ValidationReport run_validation(const ScenarioConfig& cfg, const std::string& measurements) {
  stage("config", [&] {
    cfg.system.validate();
    if (measurements.empty()) throw ConfigError("validate: no measurement file given");
    return 0;
  });
  return stage("validate", [&] {
    const auto meas = sim::load_measurements(cfg.resolve(measurements));
    auto rep = sim::validate_against_measurements(meas, cfg.system);
    std::filesystem::create_directories(cfg.output.dir);
    json j;
    j["layer_rmse_k"] = rep.layer_rmse;
    detail::write_json(std::filesystem::path(cfg.output.dir) / "validation.json", j);
    return rep;
  });
}

}  // namespace stes::scenario
