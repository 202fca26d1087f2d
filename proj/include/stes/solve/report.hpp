#pragma once

#include <json.hpp>

#include "stes/solve/ipm.hpp"

namespace stes::solve {

inline nlohmann::ordered_json to_json(const KktResiduals& r) {
  return {{"stationarity", r.stationarity}, {"primal", r.primal}, {"complementarity", r.complementarity}};
}

/// Deterministic part of a result; timings live in timing_json.
inline nlohmann::ordered_json to_json(const SolveResult& r, bool include_point = true) {
  nlohmann::ordered_json j;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["residuals"] = to_json(r.residuals);
  if (include_point) {
    j["x"] = r.x;
    j["multipliers"] = {{"lambda", r.multipliers.lambda},
                        {"z_lower", r.multipliers.z_lower},
                        {"z_upper", r.multipliers.z_upper}};
  }
  return j;
}

inline nlohmann::ordered_json timing_json(const SolveResult& r) {
  return {{"wall_time_s", r.wall_time}, {"time_per_iteration_s", r.time_per_iteration}, {"iterations", r.iterations}};
}

inline nlohmann::ordered_json history_json(const SolveResult& r) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& h : r.history) {
    a.push_back({{"iter", h.iter},
                 {"objective", h.objective},
                 {"inf_pr", h.primal},
                 {"inf_du", h.dual},
                 {"mu", h.mu},
                 {"step", h.step_norm},
                 {"regularization", h.regularization},
                 {"alpha_dual", h.alpha_dual},
                 {"alpha_primal", h.alpha_primal},
                 {"backtracks", h.backtracks},
                 {"soc", h.soc}});
  }
  return a;
}

}  // namespace stes::solve
