#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stes/transcribe/energy_nlp.hpp"

namespace stes::transcribe {

/// Counts and sparsity statistics of a transcribed problem.
inline nlohmann::ordered_json problem_summary(const EnergyNlp& nlp) {
  nlohmann::ordered_json j;
  j["form"] = nlp.form() == Form::full ? "full" : "averaged";
  j["variant"] = to_string(nlp.spec().variant);
  j["grid"] = {{"n_fine", nlp.spec().grid.n_fine},
               {"h_fine", nlp.spec().grid.h_fine},
               {"k", nlp.spec().grid.k},
               {"thermal_nodes", nlp.thermal_nodes()},
               {"thermal_step", nlp.thermal_step()}};
  j["layers"] = {{"storage", nlp.storage_layers()}, {"ground", nlp.ground_layers()}};

  int fixed = 0, free = 0;
  for (int i = 0; i < nlp.n(); ++i) {
    const double lo = nlp.x_lower()[static_cast<std::size_t>(i)], hi = nlp.x_upper()[static_cast<std::size_t>(i)];
    if (lo == hi) ++fixed;
    if (lo == -kInf && hi == kInf) ++free;
  }
  j["variables"] = {{"total", nlp.n()},
                    {"node_exclusive_formula", nlp.formula_variable_count()},
                    {"fixed", fixed},
                    {"free", free}};

  std::map<std::string, int> kinds;
  int eq = 0;
  for (int r = 0; r < nlp.m(); ++r) {
    ++kinds[to_string(nlp.row_kind(r))];
    if (nlp.is_equality(r)) ++eq;
  }
  j["constraints"] = {{"total", nlp.m()}, {"equality", eq}, {"inequality", nlp.m() - eq}};
  auto& by_kind = j["constraints"]["by_kind"];
  by_kind = nlohmann::ordered_json::object();
  for (const auto& [k, c] : kinds) by_kind[k] = c;

  std::vector<int> per_row(static_cast<std::size_t>(nlp.m()), 0), per_col(static_cast<std::size_t>(nlp.n()), 0);
  for (std::size_t p = 0; p < nlp.jac_nnz(); ++p) {
    ++per_row[static_cast<std::size_t>(nlp.jac_rows()[p])];
    ++per_col[static_cast<std::size_t>(nlp.jac_cols()[p])];
  }
  const double density = static_cast<double>(nlp.jac_nnz()) / (static_cast<double>(nlp.n()) * std::max(1, nlp.m()));
  j["jacobian"] = {{"nnz", nlp.jac_nnz()},
                   {"density", density},
                   {"max_per_row", per_row.empty() ? 0 : *std::max_element(per_row.begin(), per_row.end())},
                   {"max_per_column", per_col.empty() ? 0 : *std::max_element(per_col.begin(), per_col.end())}};
  int diag = 0;
  for (std::size_t p = 0; p < nlp.hess_nnz(); ++p) diag += nlp.hess_rows()[p] == nlp.hess_cols()[p];
  j["hessian"] = {{"nnz_lower", nlp.hess_nnz()}, {"diagonal", diag}};
  return j;
}

}  // namespace stes::transcribe
