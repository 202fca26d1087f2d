#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stes/econ/cost.hpp"

namespace stes::econ {

/// Capacity in the display unit of the cost table (MW, MWh, m3).
inline double display_capacity(Component c, double native) { return c == Component::storage ? native : native * 1e-6; }

inline nlohmann::ordered_json to_json(const CostBreakdown& b) {
  nlohmann::ordered_json j;
  j["grid"] = {{"import_eur_per_year", b.grid_import},
               {"export_eur_per_year", b.grid_export},
               {"import_npv_eur", b.npv(b.grid_import)},
               {"export_npv_eur", -b.npv(b.grid_export)}};
  auto& comps = j["components"];
  comps = nlohmann::ordered_json::object();
  for (int i = 0; i < kComponents; ++i) {
    const auto& c = b.fixed.components[static_cast<std::size_t>(i)];
    comps[kComponentNames[static_cast<std::size_t>(i)]] = {
        {"present", b.present[static_cast<std::size_t>(i)]},
        {"capacity", display_capacity(static_cast<Component>(i), c.capacity)},
        {"capacity_unit", kCapacityUnits[static_cast<std::size_t>(i)]},
        {"capex_eur", c.capex},
        {"opex_eur_per_year", c.opex},
        {"opex_npv_eur", b.npv(c.opex)}};
  }
  j["total"] = {{"capex_eur", b.fixed.capex_sum},
                {"opex_eur_per_year", b.fixed.opex_sum},
                {"opex_npv_eur", b.npv(b.fixed.opex_sum)},
                {"ani_eur_per_year", b.fixed.ani},
                {"j_fix_eur_per_year", b.fixed.j_fix},
                {"yearly_total_eur", b.yearly_total()},
                {"npv_eur", b.npv_total()},
                {"eur_per_m2_year", b.cost_per_m2()}};
  j["factors"] = {{"annuity_factor", b.anf}, {"present_value_factor", b.pv_factor}, {"floor_area_m2", b.floor_area}};
  return j;
}

/// Inverse of to_json, for re-rendering saved breakdowns.
inline CostBreakdown breakdown_from_json(const nlohmann::ordered_json& j) {
  CostBreakdown b;
  try {
    b.grid_import = j.at("grid").at("import_eur_per_year").get<double>();
    b.grid_export = j.at("grid").at("export_eur_per_year").get<double>();
    for (int i = 0; i < kComponents; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const auto& c = j.at("components").at(kComponentNames[u]);
      b.present[u] = c.at("present").get<bool>();
      const double cap = c.at("capacity").get<double>();
      b.fixed.components[u] = {static_cast<Component>(i) == Component::storage ? cap : cap * 1e6,
                               c.at("capex_eur").get<double>(), c.at("opex_eur_per_year").get<double>()};
    }
    const auto& t = j.at("total");
    b.fixed.capex_sum = t.at("capex_eur").get<double>();
    b.fixed.opex_sum = t.at("opex_eur_per_year").get<double>();
    b.fixed.ani = t.at("ani_eur_per_year").get<double>();
    b.fixed.j_fix = t.at("j_fix_eur_per_year").get<double>();
    const auto& f = j.at("factors");
    b.anf = f.at("annuity_factor").get<double>();
    b.pv_factor = f.at("present_value_factor").get<double>();
    b.floor_area = f.at("floor_area_m2").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("cost breakdown JSON: ") + e.what());
  }
  return b;
}

/// Aligned text table with one column per breakdown, mirroring the layout
/// Grid / Heatpump / PTES / PV / Wind / Battery / Total. Money in MEUR (NPV).
inline std::string render_table(const std::vector<std::pair<std::string, CostBreakdown>>& cols) {
  std::string out;
  char buf[64];
  auto row = [&](const std::string& cat, const std::string& metric, auto value_of, const std::string& unit) {
    std::snprintf(buf, sizeof(buf), "%-10s %-12s", cat.c_str(), metric.c_str());
    out += buf;
    for (const auto& [name, b] : cols) {
      const auto v = value_of(b);
      if (v) {
        std::snprintf(buf, sizeof(buf), " %14.2f", *v);
      } else {
        std::snprintf(buf, sizeof(buf), " %14s", "-");
      }
      out += buf;
    }
    out += "  " + unit + "\n";
  };
  using opt = std::optional<double>;

  std::snprintf(buf, sizeof(buf), "%-10s %-12s", "Category", "Metric");
  out += buf;
  for (const auto& c : cols) {
    std::snprintf(buf, sizeof(buf), " %14s", c.first.c_str());
    out += buf;
  }
  out += "  Unit\n";

  row("Grid", "Import", [](const CostBreakdown& b) { return opt(b.npv(b.grid_import) * 1e-6); }, "MEUR");
  row("Grid", "Export", [](const CostBreakdown& b) { return opt(-b.npv(b.grid_export) * 1e-6); }, "MEUR");
  for (Component c : {Component::heat_pump, Component::storage, Component::pv, Component::wind, Component::battery}) {
    const auto i = static_cast<std::size_t>(c);
    const std::string cat = kComponentNames[i];
    auto get = [i](const CostBreakdown& b, auto f) { return b.present[i] ? opt(f(b.fixed.components[i], b)) : opt(); };
    row(cat, "Capacity",
        [&](const CostBreakdown& b) {
          return get(b, [c](const ComponentCost& cc, const CostBreakdown&) { return display_capacity(c, cc.capacity); });
        },
        kCapacityUnits[i]);
    row(cat, "CAPEX",
        [&](const CostBreakdown& b) { return get(b, [](const ComponentCost& cc, const CostBreakdown&) { return cc.capex * 1e-6; }); },
        "MEUR");
    row(cat, "OPEX",
        [&](const CostBreakdown& b) {
          return get(b, [](const ComponentCost& cc, const CostBreakdown& bb) { return bb.npv(cc.opex) * 1e-6; });
        },
        "MEUR");
  }
  row("Total", "CAPEX", [](const CostBreakdown& b) { return opt(b.fixed.capex_sum * 1e-6); }, "MEUR");
  row("Total", "OPEX", [](const CostBreakdown& b) { return opt(b.npv(b.fixed.opex_sum) * 1e-6); }, "MEUR");
  row("Total", "Total NPV", [](const CostBreakdown& b) { return opt(b.npv_total() * 1e-6); }, "MEUR");
  row("Total", "Yearly cost", [](const CostBreakdown& b) { return opt(b.cost_per_m2()); }, "EUR/m2");
  return out;
}

}  // namespace stes::econ
