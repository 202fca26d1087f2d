#pragma once

// Scenario configuration: one YAML file with nested sections. Every parameter
// has a built-in default, so a minimal file only names the input series.
//
//   data:
//     t_amb: weather/t_amb.csv     # degC
//     ghi: weather/ghi.csv         # W/m2 (or gsi: for a tilted-plane series)
//     wind: weather/wind.csv       # W at the reference wind capacity
//     load: demand/electricity.csv # W
//
// Relative paths resolve against the directory of the config file.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "stes/core/error.hpp"
#include "stes/econ/cost.hpp"
#include "stes/model/system.hpp"
#include "stes/scenario/synthetic.hpp"
#include "stes/sim/analysis.hpp"
#include "stes/solve/ipm.hpp"
#include "stes/timeseries/exogenous.hpp"
#include "stes/timeseries/profiles.hpp"
#include "stes/transcribe/energy_nlp.hpp"

namespace stes::scenario {

struct DataSource {
  std::string t_amb, ghi, gsi, wind, load, heat_load;
  /// Power columns in the files are multiplied by this to obtain W.
  double power_unit = 1.0;
  bool synthetic = false;
  SyntheticOptions synthetic_options;
  std::size_t first_hour = 0;
};

struct OutputOptions {
  std::string dir = "out";
  /// Also solve the other NLP form for the full-vs-averaged overlay.
  bool overlay = true;
};

struct ScenarioConfig {
  DataSource data;
  transcribe::GridSpec grid;
  transcribe::Form form = transcribe::Form::averaged;
  transcribe::Variant variant = transcribe::Variant::full;
  model::SystemParams system;
  econ::CostTable costs;
  econ::ReferenceCapacities capacities;
  ts::PvModuleParams pv_module;
  ts::HeatLoadParams heat_load;
  sim::StudyConfig study;
  double direct_supply_temperature = 40.0;
  std::vector<double> sweep_prices{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<transcribe::Variant> compare_variants{transcribe::Variant::full, transcribe::Variant::no_ptes,
                                                    transcribe::Variant::no_wind};
  solve::SolverOptions solver;
  int multi_start = 1;
  std::uint64_t seed = 1;
  std::string measurements;
  OutputOptions output;
  std::filesystem::path base_dir = ".";

  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base_dir / path).lexically_normal().string();
  }

  void validate() const {
    const bool any_file = !data.t_amb.empty() || !data.ghi.empty() || !data.gsi.empty() || !data.wind.empty() ||
                          !data.load.empty();
    if (data.synthetic && any_file) throw ConfigError("data: use either synthetic data or input files, not both");
    if (!data.synthetic) {
      auto need = [&](const std::string& p, const char* what) {
        if (p.empty()) throw ConfigError(std::string("data: missing path '") + what + "'");
        if (!std::filesystem::exists(resolve(p))) {
          throw ConfigError(std::string("data: ") + what + " file '" + resolve(p) + "' does not exist");
        }
      };
      need(data.t_amb, "t_amb");
      need(data.wind, "wind");
      need(data.load, "load");
      if (data.ghi.empty() == data.gsi.empty()) throw ConfigError("data: give exactly one of 'ghi' and 'gsi'");
      need(data.ghi.empty() ? data.gsi : data.ghi, data.ghi.empty() ? "gsi" : "ghi");
      if (!data.heat_load.empty()) need(data.heat_load, "heat_load");
    }
    if (!(data.power_unit > 0.0)) throw ConfigError("data: power_unit must be positive");
    if (data.first_hour + static_cast<std::size_t>(std::max(grid.n_fine, 0)) > ts::kHoursPerYear) {
      throw ConfigError("grid: first_hour + hours exceeds one year");
    }
    grid.validate(form == transcribe::Form::averaged || output.overlay);
    system.validate();
    costs.validate();
    pv_module.validate();
    heat_load.validate();
    for (double p : sweep_prices) {
      if (!(p > 0.0)) throw ConfigError("sweep: prices must be positive");
    }
    if (multi_start < 1) throw ConfigError("solver: multi_start must be at least 1");
    if (!(capacities.pv_wp > 0.0) || !(capacities.wind_w > 0.0)) {
      throw ConfigError("capacities: reference PV and wind capacities must be positive");
    }
    solver.validate();
  }
};

namespace detail {

inline void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> keys) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError("config: section '" + section + "' must be a mapping");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "' in section '" + section + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& section) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for '" + section + "." + key + "'");
  }
}

inline std::array<double, econ::kComponents> read_components(const YAML::Node& node, const std::string& section,
                                                             std::array<double, econ::kComponents> v) {
  check_keys(node, section, {"pv", "wind", "battery", "ptes", "heat_pump"});
  const char* keys[] = {"pv", "wind", "battery", "ptes", "heat_pump"};
  for (std::size_t i = 0; i < econ::kComponents; ++i) read(node, keys[i], v[i], section);
  return v;
}

}  // namespace detail

inline ScenarioConfig parse_config(const YAML::Node& root, const std::filesystem::path& base_dir = ".") {
  using detail::check_keys;
  using detail::read;
  ScenarioConfig c;
  c.base_dir = base_dir;
  if (!root || root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  check_keys(root, "top level",
             {"data", "grid", "form", "variant", "storage", "ground", "thermal", "heat_pump", "battery", "limits",
              "costs", "capacities", "pv_module", "heat_load", "study", "direct_supply_temperature", "sweep",
              "compare", "solver", "seed", "measurements", "output"});

  const auto d = root["data"];
  check_keys(d, "data",
             {"t_amb", "ghi", "gsi", "wind", "load", "heat_load", "power_unit", "synthetic", "synthetic_seed",
              "first_hour"});
  read(d, "t_amb", c.data.t_amb, "data");
  read(d, "ghi", c.data.ghi, "data");
  read(d, "gsi", c.data.gsi, "data");
  read(d, "wind", c.data.wind, "data");
  read(d, "load", c.data.load, "data");
  read(d, "heat_load", c.data.heat_load, "data");
  if (d && d["power_unit"]) {
    const auto u = d["power_unit"].as<std::string>();
    if (u == "W") c.data.power_unit = 1.0;
    else if (u == "kW") c.data.power_unit = 1e3;
    else if (u == "MW") c.data.power_unit = 1e6;
    else throw ConfigError("data: power_unit must be W, kW or MW");
  }
  read(d, "synthetic", c.data.synthetic, "data");
  read(d, "synthetic_seed", c.data.synthetic_options.seed, "data");
  read(d, "first_hour", c.data.first_hour, "data");

  const auto g = root["grid"];
  check_keys(g, "grid", {"hours", "step_s", "window"});
  read(g, "hours", c.grid.n_fine, "grid");
  read(g, "step_s", c.grid.h_fine, "grid");
  read(g, "window", c.grid.k, "grid");
  if (c.grid.h_fine != 3600.0) throw ConfigError("grid: only hourly fine steps (3600 s) match the hourly input data");

  if (root["form"]) {
    const auto f = root["form"].as<std::string>();
    if (f == "full") c.form = transcribe::Form::full;
    else if (f == "averaged") c.form = transcribe::Form::averaged;
    else throw ConfigError("config: form must be 'full' or 'averaged'");
  }
  if (root["variant"]) c.variant = transcribe::parse_variant(root["variant"].as<std::string>());

  auto& sys = c.system;
  check_keys(root["storage"], "storage", {"top_side", "bottom_side", "height", "layers"});
  read(root["storage"], "top_side", sys.geometry.top_side, "storage");
  read(root["storage"], "bottom_side", sys.geometry.bottom_side, "storage");
  read(root["storage"], "height", sys.geometry.height, "storage");
  read(root["storage"], "layers", sys.geometry.layers, "storage");
  check_keys(root["ground"], "ground", {"layers", "boundary_distance", "t_boundary"});
  read(root["ground"], "layers", sys.ground.layers, "ground");
  read(root["ground"], "boundary_distance", sys.ground.boundary_distance, "ground");
  read(root["ground"], "t_boundary", sys.ground.t_boundary, "ground");
  const auto th = root["thermal"];
  check_keys(th, "thermal", {"rho", "c_p", "rho_g", "c_p_g", "lambda_g", "lambda_eff", "u_top", "u_wall"});
  read(th, "rho", sys.thermal.rho, "thermal");
  read(th, "c_p", sys.thermal.c_p, "thermal");
  read(th, "rho_g", sys.thermal.rho_g, "thermal");
  read(th, "c_p_g", sys.thermal.c_p_g, "thermal");
  read(th, "lambda_g", sys.thermal.lambda_g, "thermal");
  read(th, "lambda_eff", sys.thermal.lambda_eff, "thermal");
  read(th, "u_top", sys.thermal.u_top, "thermal");
  read(th, "u_wall", sys.thermal.u_wall, "thermal");
  check_keys(root["heat_pump"], "heat_pump", {"eta_lorenz", "t_sink", "capacity", "min_lift_margin"});
  read(root["heat_pump"], "eta_lorenz", sys.heat_pump.eta_lorenz, "heat_pump");
  read(root["heat_pump"], "t_sink", sys.heat_pump.t_sink, "heat_pump");
  read(root["heat_pump"], "capacity", sys.heat_pump.capacity, "heat_pump");
  read(root["heat_pump"], "min_lift_margin", sys.heat_pump.min_lift_margin, "heat_pump");
  check_keys(root["battery"], "battery", {"capacity_wh", "eta_ch", "eta_dis", "c_rate_hours"});
  read(root["battery"], "capacity_wh", sys.battery.capacity_wh, "battery");
  read(root["battery"], "eta_ch", sys.battery.eta_ch, "battery");
  read(root["battery"], "eta_dis", sys.battery.eta_dis, "battery");
  read(root["battery"], "c_rate_hours", sys.battery.c_rate_hours, "battery");
  check_keys(root["limits"], "limits", {"t_top_min", "t_min", "t_max", "supply_return_spread"});
  read(root["limits"], "t_top_min", sys.limits.t_top_min, "limits");
  read(root["limits"], "t_min", sys.limits.t_min, "limits");
  read(root["limits"], "t_max", sys.limits.t_max, "limits");
  read(root["limits"], "supply_return_spread", sys.limits.supply_return_spread, "limits");

  const auto co = root["costs"];
  check_keys(co, "costs",
             {"c_buy", "c_sell", "years", "rate", "floor_area", "fx_usd_to_eur", "specific_cost", "opex_fraction"});
  read(co, "c_buy", c.costs.c_buy, "costs");
  read(co, "c_sell", c.costs.c_sell, "costs");
  read(co, "years", c.costs.years, "costs");
  read(co, "rate", c.costs.rate, "costs");
  read(co, "floor_area", c.costs.floor_area, "costs");
  read(co, "fx_usd_to_eur", c.costs.fx_usd_to_eur, "costs");
  if (co && co["specific_cost"]) {
    c.costs.specific_cost = detail::read_components(co["specific_cost"], "costs.specific_cost", c.costs.specific_cost);
  }
  if (co && co["opex_fraction"]) {
    c.costs.opex_fraction = detail::read_components(co["opex_fraction"], "costs.opex_fraction", c.costs.opex_fraction);
  }
  check_keys(root["capacities"], "capacities", {"pv_wp", "wind_w"});
  read(root["capacities"], "pv_wp", c.capacities.pv_wp, "capacities");
  read(root["capacities"], "wind_w", c.capacities.wind_w, "capacities");

  const auto pv = root["pv_module"];
  check_keys(pv, "pv_module", {"eta_ref", "beta_ref", "t_ref", "performance_ratio", "tilt_deg", "c1", "c2", "c3"});
  read(pv, "eta_ref", c.pv_module.eta_ref, "pv_module");
  read(pv, "beta_ref", c.pv_module.beta_ref, "pv_module");
  read(pv, "t_ref", c.pv_module.t_ref, "pv_module");
  read(pv, "performance_ratio", c.pv_module.performance_ratio, "pv_module");
  read(pv, "tilt_deg", c.pv_module.tilt_deg, "pv_module");
  read(pv, "c1", c.pv_module.c1, "pv_module");
  read(pv, "c2", c.pv_module.c2, "pv_module");
  read(pv, "c3", c.pv_module.c3, "pv_module");
  const auto hl = root["heat_load"];
  check_keys(hl, "heat_load",
             {"t_border", "t_room", "morning_peak_mu", "morning_peak_sigma", "evening_peak_mu", "evening_peak_sigma",
              "annual_sh_target_wh", "annual_dhw_target_wh"});
  read(hl, "t_border", c.heat_load.t_border, "heat_load");
  read(hl, "t_room", c.heat_load.t_room, "heat_load");
  read(hl, "morning_peak_mu", c.heat_load.morning_peak_mu, "heat_load");
  read(hl, "morning_peak_sigma", c.heat_load.morning_peak_sigma, "heat_load");
  read(hl, "evening_peak_mu", c.heat_load.evening_peak_mu, "heat_load");
  read(hl, "evening_peak_sigma", c.heat_load.evening_peak_sigma, "heat_load");
  read(hl, "annual_sh_target_wh", c.heat_load.annual_sh_target_wh, "heat_load");
  read(hl, "annual_dhw_target_wh", c.heat_load.annual_dhw_target_wh, "heat_load");

  const auto st = root["study"];
  check_keys(st, "study", {"n_values", "d_values", "benchmark_n", "benchmark_d"});
  read(st, "n_values", c.study.n_values, "study");
  read(st, "d_values", c.study.d_values, "study");
  read(st, "benchmark_n", c.study.benchmark_n, "study");
  read(st, "benchmark_d", c.study.benchmark_d, "study");

  read(root, "direct_supply_temperature", c.direct_supply_temperature, "top level");
  check_keys(root["sweep"], "sweep", {"prices"});
  read(root["sweep"], "prices", c.sweep_prices, "sweep");
  check_keys(root["compare"], "compare", {"variants"});
  if (root["compare"] && root["compare"]["variants"]) {
    c.compare_variants.clear();
    for (const auto& v : root["compare"]["variants"]) c.compare_variants.push_back(transcribe::parse_variant(v.as<std::string>()));
  }

  const auto so = root["solver"];
  check_keys(so, "solver", {"tol", "max_iter", "multi_start", "mu_init"});
  read(so, "tol", c.solver.kkt_tol, "solver");
  read(so, "max_iter", c.solver.max_iter, "solver");
  read(so, "multi_start", c.multi_start, "solver");
  read(so, "mu_init", c.solver.mu_init, "solver");
  read(root, "seed", c.seed, "top level");
  read(root, "measurements", c.measurements, "top level");
  check_keys(root["output"], "output", {"dir", "overlay"});
  read(root["output"], "dir", c.output.dir, "output");
  read(root["output"], "overlay", c.output.overlay, "output");
  c.output.dir = c.resolve(c.output.dir);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path + "' does not exist");
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  try {
    return parse_config(root, std::filesystem::absolute(path).parent_path());
  } catch (const YAML::Exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

/// Full-year input profiles: files as configured, or the synthetic year.
inline ts::ExogenousData load_year(const ScenarioConfig& c) {
  if (c.data.synthetic) {
    auto o = c.data.synthetic_options;
    o.pv = c.pv_module;
    o.heat = c.heat_load;
    o.pv_capacity_wp = c.capacities.pv_wp;
    o.wind_capacity_w = c.capacities.wind_w;
    return synthetic_year(o);
  }
  auto power = [&](const std::string& p) {
    auto s = ts::load_csv(c.resolve(p), ts::Unit::Watt);
    if (c.data.power_unit == 1.0) return s;
    std::vector<double> v(s.values().begin(), s.values().end());
    for (double& x : v) x *= c.data.power_unit;
    return ts::HourlySeries(ts::Unit::Watt, std::move(v), s.start_epoch());
  };
  const auto t_amb = ts::load_csv(c.resolve(c.data.t_amb), ts::Unit::Celsius);
  ts::HourlySeries pv_w;
  const double area = ts::module_area_for_capacity(c.capacities.pv_wp, c.pv_module);
  const auto per_area = c.data.ghi.empty()
                            ? ts::pv_power_from_gsi(ts::load_csv(c.resolve(c.data.gsi), ts::Unit::WattPerSquareMetre), t_amb, c.pv_module)
                            : ts::pv_power(ts::load_csv(c.resolve(c.data.ghi), ts::Unit::WattPerSquareMetre), t_amb, c.pv_module);
  std::vector<double> pv(per_area.size());
  for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = area * per_area[k];
  ts::ExogenousData d{t_amb, ts::HourlySeries(ts::Unit::Watt, std::move(pv), t_amb.start_epoch()), power(c.data.wind),
                      power(c.data.load),
                      c.data.heat_load.empty() ? ts::synthesize_heat_load(t_amb, c.heat_load) : power(c.data.heat_load)};
  d.validate();
  return d;
}

/// Input profiles restricted to the configured horizon.
inline ts::ExogenousData load_data(const ScenarioConfig& c) {
  const auto year = load_year(c);
  if (c.data.first_hour == 0 && static_cast<std::size_t>(c.grid.n_fine) == year.size()) return year;
  return year.slice(c.data.first_hour, static_cast<std::size_t>(c.grid.n_fine));
}

inline transcribe::ProblemSpec problem_spec(const ScenarioConfig& c, ts::ExogenousData data) {
  transcribe::ProblemSpec s;
  s.system = c.system;
  s.costs = c.costs;
  s.capacities = c.capacities;
  s.capacities.battery_wh = c.system.battery.capacity_wh;
  s.capacities.hp_w = c.system.heat_pump.capacity;
  s.data = std::move(data);
  s.grid = c.grid;
  s.variant = c.variant;
  s.direct_supply_temperature = c.direct_supply_temperature;
  return s;
}

}  // namespace stes::scenario
