// stes: command-line front end of the scenario runner.
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stes/econ/report.hpp"
#include "stes/scenario/config.hpp"
#include "stes/scenario/runner.hpp"
#include "stes/scenario/synthetic.hpp"
#include "stes/transcribe/summary.hpp"

namespace fs = std::filesystem;
using namespace stes;

namespace {

struct Globals {
  std::string config;
  std::optional<std::string> variant, out, form;
  std::optional<int> fine_grid, multi_start;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

scenario::ScenarioConfig make_config(const Globals& g) {
  scenario::ScenarioConfig c;
  if (g.config.empty()) {
    c.data.synthetic = true;
    c.output.dir = fs::absolute("out").string();
  } else {
    c = scenario::load_config(g.config);
  }
  if (g.variant) c.variant = transcribe::parse_variant(*g.variant);
  if (g.out) c.output.dir = fs::absolute(*g.out).string();
  if (g.fine_grid) c.grid.n_fine = *g.fine_grid;
  if (g.tol) c.solver.kkt_tol = *g.tol;
  if (g.multi_start) c.multi_start = *g.multi_start;
  if (g.seed) c.seed = *g.seed;
  if (g.form) {
    if (*g.form == "full") c.form = transcribe::Form::full;
    else if (*g.form == "averaged") c.form = transcribe::Form::averaged;
    else throw ConfigError("--form must be 'full' or 'averaged'");
  }
  if (g.verbose) c.solver.log = &std::cerr;
  return c;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_design(const model::DesignVector& d) {
  std::printf("design   s_pv %.4f  s_wind %.4f  s_b %.4f  s_s %.4f  s_hp %.4f\n", d.s_pv, d.s_wind, d.s_b, d.s_s, d.s_hp);
}

void print_outcome(const scenario::SolveOutcome& o, const scenario::SolutionMetrics& m) {
  std::printf("%s NLP, variant %s: %s after %d iterations, %.2f s\n", scenario::form_name(o.nlp->form()),
              transcribe::to_string(o.nlp->spec().variant), solve::to_string(o.result.status), o.result.iterations,
              o.result.wall_time);
  std::printf("kkt      stationarity %.2e  primal %.2e  complementarity %.2e\n", o.result.residuals.stationarity,
              o.result.residuals.primal, o.result.residuals.complementarity);
  print_design(o.solution.design);
  std::printf("cost     %.0f EUR/year  (%.3f EUR/m2 per year)\n", m.cost.yearly_total(), m.cost.cost_per_m2());
  std::printf("autonomy %.4f\n", m.autonomy);
  if (m.storage_efficiency.value) std::printf("eta_s    %.4f\n", *m.storage_efficiency.value);
}

int gen_load(const Globals& g) {
  auto c = make_config(g);
  ts::HourlySeries t_amb;
  if (c.data.synthetic) {
    t_amb = scenario::synthetic_weather(c.data.synthetic_options).t_amb;
  } else {
    if (c.data.t_amb.empty()) throw ConfigError("gen-load: config names no t_amb file");
    t_amb = ts::load_csv(c.resolve(c.data.t_amb), ts::Unit::Celsius);
  }
  const auto q = ts::synthesize_heat_load(t_amb, c.heat_load);
  fs::create_directories(c.output.dir);
  const auto path = fs::path(c.output.dir) / "heat_load.csv";
  ts::write_csv(path.string(), q);
  std::printf("wrote %s (%.3f GWh)\n", path.string().c_str(), q.integral_unit_hours() * 1e-9);
  return 0;
}

int gen_synthetic(const Globals& g) {
  auto c = make_config(g);
  auto o = c.data.synthetic_options;
  if (g.seed) o.seed = *g.seed;
  o.wind_capacity_w = c.capacities.wind_w;
  const auto w = scenario::synthetic_weather(o);
  const fs::path dir = c.output.dir;
  fs::create_directories(dir);
  ts::write_csv((dir / "t_amb.csv").string(), w.t_amb);
  ts::write_csv((dir / "ghi.csv").string(), w.ghi);
  ts::write_csv((dir / "wind.csv").string(), w.wind);
  ts::write_csv((dir / "electricity.csv").string(), w.load);
  std::ofstream cfg(dir / "scenario.yaml");
  cfg << "data:\n  t_amb: t_amb.csv\n  ghi: ghi.csv\n  wind: wind.csv\n  load: electricity.csv\n"
      << "output:\n  dir: results\n";
  std::printf("wrote synthetic inputs and scenario.yaml to %s\n", dir.string().c_str());
  return 0;
}

int sim_run(const Globals& g) {
  const auto r = scenario::run_simulation(make_config(g));
  std::printf("periodic after %d years (mismatch %.2e K), energy audit relative error %.2e\n", r.periodic.years,
              r.periodic.mismatch, r.audit.relative_error());
  return 0;
}

int sim_study(const Globals& g) {
  const auto r = scenario::run_study(make_config(g));
  for (const auto& p : r.points) std::printf("n %3d  d %6.2f  rmsle %.3e\n", p.n, p.d, p.rmsle);
  return 0;
}

int sim_validate(const Globals& g, const std::string& measurements) {
  const auto c = make_config(g);
  const auto rep = scenario::run_validation(c, measurements.empty() ? c.measurements : measurements);
  for (std::size_t m = 0; m < rep.layer_rmse.size(); ++m) std::printf("layer %zu  rmse %.4f K\n", m + 1, rep.layer_rmse[m]);
  return 0;
}

int transcribe_dump(const Globals& g, const std::string& which, bool names) {
  auto c = make_config(g);
  c.output.overlay = false;
  std::vector<transcribe::Form> forms;
  if (which == "full" || which == "both") forms.push_back(transcribe::Form::full);
  if (which == "averaged" || which == "both") forms.push_back(transcribe::Form::averaged);
  if (forms.empty()) throw ConfigError("--form must be full, averaged or both");
  for (auto f : forms) {
    c.form = f;
    c.validate();
  }
  const auto data = scenario::load_scenario_data(c);
  fs::create_directories(c.output.dir);
  for (auto f : forms) {
    const transcribe::EnergyNlp nlp(scenario::problem_spec(c, data), f);
    const auto j = transcribe::problem_summary(nlp);
    const auto stem = std::string("problem_") + scenario::form_name(f);
    std::ofstream(fs::path(c.output.dir) / (stem + ".json")) << j.dump(2) << '\n';
    std::printf("%-8s variables %d  constraints %d  jacobian nnz %zu\n", scenario::form_name(f), nlp.n(), nlp.m(),
                nlp.jac_nnz());
    if (names) {
      std::ofstream vars(fs::path(c.output.dir) / (stem + "_variables.csv"));
      vars << "index,name,lower,upper\n";
      for (int i = 0; i < nlp.n(); ++i) {
        vars << i << ',' << nlp.variable_name(i) << ',' << nlp.x_lower()[static_cast<std::size_t>(i)] << ','
             << nlp.x_upper()[static_cast<std::size_t>(i)] << '\n';
      }
      std::ofstream rows(fs::path(c.output.dir) / (stem + "_constraints.csv"));
      rows << "index,name,kind,lower,upper\n";
      for (int r = 0; r < nlp.m(); ++r) {
        rows << r << ',' << nlp.constraint_name(r) << ',' << transcribe::to_string(nlp.row_kind(r)) << ','
             << nlp.g_lower()[static_cast<std::size_t>(r)] << ',' << nlp.g_upper()[static_cast<std::size_t>(r)] << '\n';
      }
    }
  }
  return 0;
}

int optimize(const Globals& g) {
  const auto r = scenario::run_scenario(make_config(g));
  print_outcome(r.primary, r.metrics);
  std::printf("\n%s", econ::render_table({{transcribe::to_string(r.primary.nlp->spec().variant), r.metrics.cost}}).c_str());
  return 0;
}

int compare(const Globals& g, const std::string& variants) {
  auto c = make_config(g);
  std::vector<transcribe::Variant> vs = c.compare_variants;
  if (!variants.empty()) {
    vs.clear();
    for (const auto& v : split_list(variants)) vs.push_back(transcribe::parse_variant(v));
  }
  const auto out = scenario::run_comparison(c, vs);
  std::ifstream txt(fs::path(c.output.dir) / "comparison.txt");
  std::cout << txt.rdbuf();
  return out.empty() ? 3 : 0;
}

int sweep(const Globals& g, const std::string& prices) {
  auto c = make_config(g);
  std::vector<double> ps = c.sweep_prices;
  if (!prices.empty()) {
    ps.clear();
    for (const auto& p : split_list(prices)) {
      try {
        ps.push_back(std::stod(p));
      } catch (const std::exception&) {
        throw ConfigError("--prices: '" + p + "' is not a number");
      }
    }
  }
  const auto out = scenario::run_price_sweep(c, ps);
  std::printf("%-8s %16s %10s %9s", "price", "total EUR/year", "EUR/m2", "autonomy");
  std::printf("   only-hp %16s %10s\n", "total EUR/year", "EUR/m2");
  for (const auto& e : out) {
    std::printf("%-8.3f %16.0f %10.3f %9.4f", e.price, e.metrics.cost.yearly_total(), e.metrics.cost.cost_per_m2(),
                e.metrics.autonomy);
    if (e.only_hp) std::printf("           %16.0f %10.3f", e.only_hp->cost.yearly_total(), e.only_hp->cost.cost_per_m2());
    std::printf("\n");
  }
  return 0;
}

int bench(const Globals& g) {
  const auto b = scenario::run_averaging_benchmark(make_config(g));
  for (const auto* o : {&b.full, &b.averaged}) {
    std::printf("%-8s variables %7d  iterations %4d  total %8.2f s  per iteration %.4f s\n",
                scenario::form_name(o->nlp->form()), o->nlp->n(), o->result.iterations, o->result.wall_time,
                o->result.time_per_iteration);
  }
  std::printf("time ratio full/averaged %.2f (reduction %.1f %%)\n", b.time_ratio, 100.0 * (1.0 - 1.0 / b.time_ratio));
  std::printf("max design deviation %.3f %%  NRMSE P_hp %.3f %%  NRMSE T_g1 %.3f %%\n", 100.0 * b.max_design_deviation,
              100.0 * b.nrmse_p_hp, 100.0 * b.nrmse_t_g1);
  return 0;
}

int report(const Globals& g, const std::vector<std::string>& dirs) {
  if (dirs.empty()) throw ConfigError("report: name at least one result directory");
  std::vector<std::pair<std::string, econ::CostBreakdown>> cols;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : dirs) {
    const auto path = fs::path(d) / "cost.json";
    std::ifstream in(path);
    if (!in) throw DataError("report: cannot open '" + path.string() + "'");
    nlohmann::ordered_json cj;
    try {
      in >> cj;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("report: '" + path.string() + "': " + e.what());
    }
    const auto name = fs::path(d).lexically_normal().filename().string();
    cols.emplace_back(name.empty() ? d : name, econ::breakdown_from_json(cj));
    j[cols.back().first] = cj;
  }
  const auto table = econ::render_table(cols);
  std::cout << table;
  if (g.out) {
    fs::create_directories(*g.out);
    std::ofstream(fs::path(*g.out) / "report.txt") << table;
    std::ofstream(fs::path(*g.out) / "report.json") << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and operation optimization of a district energy system with pit thermal storage"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Scenario YAML file (default: built-in synthetic scenario)");
  app.add_option("--variant", g.variant, "full, no-ptes, no-wind or only-hp");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--fine-grid", g.fine_grid, "Number of hourly fine intervals");
  app.add_option("--tol", g.tol, "KKT tolerance of the solver");
  app.add_option("--multi-start", g.multi_start, "Number of solver starts");
  app.add_option("--form", g.form, "NLP form: full or averaged");
  app.add_option("--seed", g.seed, "Seed for multi-start points and synthetic data");
  app.add_flag("-v,--verbose", g.verbose, "Print the solver iteration log");

  auto* c_gen = app.add_subcommand("gen-load", "Write the synthesized heat-load CSV");
  auto* c_syn = app.add_subcommand("gen-synthetic", "Write a synthetic input year and a matching config");
  auto* c_sim = app.add_subcommand("sim", "Storage simulation");
  c_sim->require_subcommand(1);
  auto* c_sim_run = c_sim->add_subcommand("run", "Year-periodic open-loop simulation");
  auto* c_sim_study = c_sim->add_subcommand("study", "Ground discretization study");
  auto* c_sim_val = c_sim->add_subcommand("validate", "Per-layer RMSE against measured temperatures");
  std::string measurements;
  c_sim_val->add_option("--measurements", measurements, "Measured layer temperatures CSV");
  auto* c_tr = app.add_subcommand("transcribe", "NLP transcription");
  c_tr->require_subcommand(1);
  auto* c_dump = c_tr->add_subcommand("dump", "Write problem statistics");
  std::string dump_form = "both";
  bool dump_names = false;
  c_dump->add_option("--which", dump_form, "full, averaged or both");
  c_dump->add_flag("--names", dump_names, "Also write variable and constraint tables");
  auto* c_opt = app.add_subcommand("optimize", "Solve one scenario and write all result files");
  auto* c_cmp = app.add_subcommand("compare", "Solve several variants side by side");
  std::string variants;
  c_cmp->add_option("--variants", variants, "Comma-separated variants (default from config)");
  auto* c_sweep = app.add_subcommand("sweep", "Electricity price sweep");
  std::string prices;
  c_sweep->add_option("--prices", prices, "Comma-separated prices in EUR/kWh (default from config)");
  auto* c_bench = app.add_subcommand("bench-averaging", "Compare the full and the averaged NLP");
  auto* c_rep = app.add_subcommand("report", "Cost table of saved result directories");
  std::vector<std::string> dirs;
  c_rep->add_option("dirs", dirs, "Result directories containing cost.json");
  for (auto* s : {c_gen, c_syn, c_sim, c_tr, c_opt, c_cmp, c_sweep, c_bench, c_rep}) s->fallthrough();
  for (auto* s : {c_sim_run, c_sim_study, c_sim_val, c_dump}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_gen->parsed()) return gen_load(g);
    if (c_syn->parsed()) return gen_synthetic(g);
    if (c_sim_run->parsed()) return sim_run(g);
    if (c_sim_study->parsed()) return sim_study(g);
    if (c_sim_val->parsed()) return sim_validate(g, measurements);
    if (c_dump->parsed()) return transcribe_dump(g, dump_form, dump_names);
    if (c_opt->parsed()) return optimize(g);
    if (c_cmp->parsed()) return compare(g, variants);
    if (c_sweep->parsed()) return sweep(g, prices);
    if (c_bench->parsed()) return bench(g);
    if (c_rep->parsed()) return report(g, dirs);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
