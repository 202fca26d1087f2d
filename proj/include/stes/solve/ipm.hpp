#pragma once

// Primal-dual interior-point method for SparseNlp problems.
//
// Inequality rows get a slack s with g(x) - s = 0 and g_l <= s <= g_u. Each iteration
// solves the barrier Newton system with the slacks eliminated,
//   [ W + Sigma_x + dw I    J'  ] [dx]   = -[ grad phi + J' lambda ]
//   [ J                    -D   ] [dl]      [ c + r_s / sigma_s    ]
// D = dc on equality rows and dc + 1/sigma_s on inequality rows, by sparse LDL'
// under a minimum-degree ordering. dw is raised until the factor shows n positive and
// m negative pivots. Steps obey fraction-to-the-boundary and an Armijo backtracking on
// the l1 merit phi + nu |c|_1 with second-order corrections; nu is the smallest
// penalty giving descent on the linearized model, never below |lambda + dlambda|_inf.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "stes/solve/kkt.hpp"

namespace stes::solve {

struct SolverOptions {
  double kkt_tol = 1e-6;
  int max_iter = 3000;

  double mu_init = 0.1;
  double mu_linear = 0.2;
  double mu_superlinear = 1.5;
  double barrier_tol_factor = 10.0;
  double tau_min = 0.99;

  double bound_push = 1e-2;
  double bound_frac = 1e-2;
  double bound_relax = 1e-8;
  double z_init = 1.0;
  double kappa_sigma = 1e10;
  double kappa_d = 1e-4;

  double reg_floor = 1e-20;
  double reg_first = 1e-4;
  double reg_max = 1e40;
  double dual_reg = 1e-8;
  double pivot_tol = 1e-300;
  int refinement_steps = 1;

  double armijo = 1e-4;
  int max_backtracks = 40;
  int max_stalled = 10;
  int max_soc = 4;

  std::ostream* log = nullptr;

  void validate() const {
    if (!(kkt_tol > 0.0)) throw ConfigError("solver: kkt_tol must be positive");
    if (max_iter < 1) throw ConfigError("solver: max_iter must be positive");
    if (!(mu_init > 0.0) || !(mu_linear > 0.0 && mu_linear < 1.0) || !(mu_superlinear > 1.0 && mu_superlinear < 2.0)) {
      throw ConfigError("solver: invalid barrier schedule");
    }
    if (!(tau_min > 0.0 && tau_min < 1.0)) throw ConfigError("solver: tau_min must lie in (0, 1)");
    if (!(bound_push > 0.0) || !(bound_frac > 0.0 && bound_frac <= 0.5)) throw ConfigError("solver: invalid bound push");
    if (bound_relax < 0.0 || !(z_init > 0.0) || !(kappa_sigma >= 1.0)) throw ConfigError("solver: invalid bound settings");
    if (!(reg_floor > 0.0) || !(reg_first > 0.0) || !(reg_max > reg_first) || !(dual_reg >= 0.0) || pivot_tol < 0.0) {
      throw ConfigError("solver: invalid regularization settings");
    }
    if (refinement_steps < 0 || max_backtracks < 1 || max_stalled < 1 || !(armijo > 0.0 && armijo < 0.5)) {
      throw ConfigError("solver: invalid line-search settings");
    }
  }
};

enum class Status { optimal, max_iter, infeasible, error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::max_iter: return "max-iter";
    case Status::infeasible: return "infeasible-detected";
    case Status::error: return "error";
  }
  return "?";
}

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double mu = 0.0;
  double step_norm = 0.0;
  double regularization = 0.0;
  double alpha_dual = 0.0;
  double alpha_primal = 0.0;
  int backtracks = 0;
  bool soc = false;
};

struct SolveResult {
  Status status = Status::error;
  std::string message;
  std::vector<double> x;
  Multipliers multipliers;
  KktResiduals residuals;
  double objective = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  double time_per_iteration = 0.0;
  std::vector<IterationRecord> history;

  bool ok() const { return status == Status::optimal; }
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

class InteriorPoint {
 public:
  InteriorPoint(const transcribe::SparseNlp& nlp, const SolverOptions& o) : nlp_(nlp), o_(o) {
    n_ = nlp.n();
    m_ = nlp.m();
    setup_variables();
    setup_rows();
    setup_kkt();
  }

  SolveResult run(std::span<const double> x0) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    initialize(x0);
    if (!evaluate_point(w_, f_, c_)) {
      res.status = Status::error;
      res.message = "evaluation failed at the initial point: " + eval_error_;
      return finish(res, t0, false);
    }
    mu_ = o_.mu_init;
    double tau = std::max(o_.tau_min, 1.0 - mu_);
    double delta_last = 0.0;
    int stalled = 0;
    log_header();

    for (int it = 0;; ++it) {
      if (!evaluate_derivatives()) {
        res.status = Status::error;
        res.message = "derivative evaluation failed at iteration " + std::to_string(it) + ": " + eval_error_;
        return finish(res, t0, true);
      }
      const auto e0 = errors(0.0);
      IterationRecord rec;
      rec.iter = it;
      rec.objective = f_;
      rec.primal = e0.primal;
      rec.dual = e0.stationarity;

      if (e0.within(o_.kkt_tol)) {
        res.iterations = it;
        res.status = Status::optimal;
        finish(res, t0, true);
        if (res.residuals.within(o_.kkt_tol)) {
          res.message = "converged";
          mu_ = std::min(mu_, o_.kkt_tol / 10.0);
          rec.mu = mu_;
          res.history.push_back(rec);
          log_line(rec);
          return res;
        }
      }
      if (it >= o_.max_iter) {
        res.iterations = it;
        res.status = Status::max_iter;
        res.message = "iteration limit reached";
        return finish(res, t0, true);
      }

      const double mu_floor = o_.kkt_tol / 10.0;
      while (mu_ > mu_floor && errors(mu_).max() <= o_.barrier_tol_factor * mu_) {
        mu_ = std::max(mu_floor, std::min(o_.mu_linear * mu_, std::pow(mu_, o_.mu_superlinear)));
        tau = std::max(o_.tau_min, 1.0 - mu_);
      }
      rec.mu = mu_;

      assemble_values();
      double delta = 0.0;
      if (!factorize_with_inertia(delta, delta_last)) {
        res.iterations = it;
        res.status = Status::error;
        res.message = "singular KKT matrix after maximal regularization at iteration " + std::to_string(it);
        res.history.push_back(rec);
        return finish(res, t0, true);
      }

      // Full-system residual pieces at the current point.
      barrier_gradient();
      const Eigen::VectorXd rhs = newton_rhs(c_);
      Eigen::VectorXd sol = solve_kkt(rhs);
      // A nearly singular matrix can pass the inertia test and still give an
      // inaccurate step; such solves are redone with more primal regularization.
      const double accuracy = 1e-6 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
      while (kkt_residual(rhs, sol) > accuracy && delta < o_.reg_max) {
        delta = std::max(100.0 * delta, 1e-10);
        set_regularization(delta);
        if (!inertia_ok()) continue;
        delta_last = delta;
        sol = solve_kkt(rhs);
      }
      rec.regularization = delta;
      step_from(sol, dw_, dl_);
      dual_step(dw_, dz_l_, dz_u_);

      const double alpha_max = boundary_step(w_, dw_, lw_, uw_, tau);
      const double alpha_z = std::min(boundary_step_z(zl_, dz_l_, tau), boundary_step_z(zu_, dz_u_, tau));

      // Smallest penalty that keeps the direction a descent direction of the merit.
      // The regularized step only approximately solves J d = -c, so the l1 model
      // uses the linearized residual itself.
      const double c1 = norm1(c_);
      const double reduction = c1 - linearized_l1(dw_);
      const double slope_phi = dot(gphi_, dw_);
      const double curv = curvature(dw_, delta);
      if (reduction > 0.0) {
        const double need = (slope_phi + 0.5 * std::max(0.0, curv)) / ((1.0 - 0.1) * reduction);
        nu_ = std::max(need, 0.0) + 1e-6;
      }
      double lam_plus = 0.0;
      for (std::size_t r = 0; r < lam_.size(); ++r) lam_plus = std::max(lam_plus, std::abs(lam_[r] + dl_[r]));
      nu_ = std::max(nu_, lam_plus);
      const double merit0 = phi(w_, f_) + nu_ * c1;
      const double slope = slope_phi - nu_ * reduction;

      double alpha = alpha_max;
      bool accepted = false, used_soc = false;
      int bt = 0;
      std::vector<double> trial(w_.size()), c_trial(c_.size());
      double f_trial = 0.0;
      for (; bt < o_.max_backtracks; ++bt) {
        axpy(w_, alpha, dw_, trial);
        const bool good = evaluate_point(trial, f_trial, c_trial);
        if (good && phi(trial, f_trial) + nu_ * norm1(c_trial) <= merit0 + o_.armijo * alpha * slope) {
          accepted = true;
          break;
        }
        if (bt == 0 && good && norm1(c_trial) >= c1) {
          if (try_soc(alpha, c_trial, tau, merit0, slope)) {
            accepted = used_soc = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // Take the shortest trial step anyway if it is evaluable.
        axpy(w_, alpha, dw_, trial);
        if (!evaluate_point(trial, f_trial, c_trial)) {
          alpha = 0.0;
          trial = w_;
          f_trial = f_;
          c_trial = c_;
        }
      }

      double alpha_dual = alpha_z;
      if (used_soc) {
        alpha = soc_alpha_;
        alpha_dual = soc_alpha_z_;
      } else {
        w_ = trial;
        f_ = f_trial;
        c_ = c_trial;
        for (std::size_t r = 0; r < lam_.size(); ++r) lam_[r] += alpha * dl_[r];
        for (std::size_t i = 0; i < zl_.size(); ++i) {
          zl_[i] += alpha_z * dz_l_[i];
          zu_[i] += alpha_z * dz_u_[i];
        }
      }
      reset_bound_multipliers();

      rec.step_norm = norm_inf(dw_);
      rec.alpha_primal = alpha;
      rec.alpha_dual = alpha_dual;
      rec.backtracks = bt;
      rec.soc = used_soc;
      res.history.push_back(rec);
      log_line(rec);

      const bool tiny = alpha * rec.step_norm <= 1e-12 * std::max(1.0, norm_inf(w_));
      stalled = tiny ? stalled + 1 : 0;
      if (stalled >= o_.max_stalled) {
        res.iterations = it + 1;
        if (norm_inf(c_) > o_.kkt_tol) {
          res.status = Status::infeasible;
          res.message = "step collapsed with constraint violation " + fmt(norm_inf(c_));
        } else {
          res.status = Status::error;
          res.message = "line search failed repeatedly";
        }
        evaluate_derivatives();
        return finish(res, t0, true);
      }
    }
  }

 private:
  // ---- setup -------------------------------------------------------------------------

  void setup_variables() {
    const auto& lo = nlp_.x_lower();
    const auto& hi = nlp_.x_upper();
    pos_.assign(static_cast<std::size_t>(n_), -1);
    for (int i = 0; i < n_; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (lo[u] > hi[u]) throw ConfigError("variable " + nlp_.variable_name(i) + " has empty bounds");
      if (lo[u] == hi[u]) continue;
      pos_[u] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
    nf_ = static_cast<int>(free_.size());
  }

  void setup_rows() {
    const auto& gl = nlp_.g_lower();
    const auto& gu = nlp_.g_upper();
    row_pos_.assign(static_cast<std::size_t>(m_), -1);
    slack_of_.assign(static_cast<std::size_t>(m_), -1);
    for (int j = 0; j < m_; ++j) {
      const auto u = static_cast<std::size_t>(j);
      if (gl[u] > gu[u]) throw ConfigError("constraint " + nlp_.constraint_name(j) + " has empty bounds");
      if (!std::isfinite(gl[u]) && !std::isfinite(gu[u])) continue;
      row_pos_[u] = static_cast<int>(rows_.size());
      if (gl[u] != gu[u]) {
        slack_of_[u] = nf_ + static_cast<int>(slack_rows_.size());
        slack_rows_.push_back(static_cast<int>(rows_.size()));
      }
      rows_.push_back(j);
    }
    ma_ = static_cast<int>(rows_.size());
    const std::size_t nw = static_cast<std::size_t>(nf_) + slack_rows_.size();
    lw_.resize(nw);
    uw_.resize(nw);
    auto relax = [&](double v, double sign) { return std::isfinite(v) ? v + sign * o_.bound_relax * std::max(1.0, std::abs(v)) : v; };
    for (int p = 0; p < nf_; ++p) {
      const auto i = static_cast<std::size_t>(free_[static_cast<std::size_t>(p)]);
      lw_[static_cast<std::size_t>(p)] = relax(nlp_.x_lower()[i], -1.0);
      uw_[static_cast<std::size_t>(p)] = relax(nlp_.x_upper()[i], 1.0);
    }
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
      const auto j = static_cast<std::size_t>(rows_[static_cast<std::size_t>(slack_rows_[s])]);
      lw_[static_cast<std::size_t>(nf_) + s] = relax(gl[j], -1.0);
      uw_[static_cast<std::size_t>(nf_) + s] = relax(gu[j], 1.0);
    }
  }

  // Lower triangle of the condensed KKT matrix with fixed slots for every contribution.
  void setup_kkt() {
    const int N = nf_ + ma_;
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(N) + nlp_.hess_nnz() + nlp_.jac_nnz());
    for (int i = 0; i < N; ++i) trip.emplace_back(i, i, 0.0);
    for (std::size_t p = 0; p < nlp_.hess_nnz(); ++p) {
      const int r = pos_[static_cast<std::size_t>(nlp_.hess_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.hess_cols()[p])];
      if (r >= 0 && c >= 0) trip.emplace_back(std::max(r, c), std::min(r, c), 0.0);
    }
    for (std::size_t p = 0; p < nlp_.jac_nnz(); ++p) {
      const int r = row_pos_[static_cast<std::size_t>(nlp_.jac_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.jac_cols()[p])];
      if (r >= 0 && c >= 0) trip.emplace_back(nf_ + r, c, 0.0);
    }
    K_.resize(N, N);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();

    auto slot = [&](int r, int c) {
      const int* inner = K_.innerIndexPtr();
      const int* b = inner + K_.outerIndexPtr()[c];
      const int* e = inner + K_.outerIndexPtr()[c + 1];
      return static_cast<int>(std::lower_bound(b, e, r) - inner);
    };
    diag_slot_.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) diag_slot_[static_cast<std::size_t>(i)] = slot(i, i);
    hess_slot_.assign(nlp_.hess_nnz(), -1);
    for (std::size_t p = 0; p < nlp_.hess_nnz(); ++p) {
      const int r = pos_[static_cast<std::size_t>(nlp_.hess_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.hess_cols()[p])];
      if (r >= 0 && c >= 0) hess_slot_[p] = slot(std::max(r, c), std::min(r, c));
    }
    jac_slot_.assign(nlp_.jac_nnz(), -1);
    for (std::size_t p = 0; p < nlp_.jac_nnz(); ++p) {
      const int r = row_pos_[static_cast<std::size_t>(nlp_.jac_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.jac_cols()[p])];
      if (r >= 0 && c >= 0) jac_slot_[p] = slot(nf_ + r, c);
    }
    ldlt_.analyzePattern(K_);

    grad_.resize(static_cast<std::size_t>(n_));
    g_.resize(static_cast<std::size_t>(m_));
    jac_.resize(nlp_.jac_nnz());
    hess_.resize(nlp_.hess_nnz());
    lam_full_.assign(static_cast<std::size_t>(m_), 0.0);
  }

  void initialize(std::span<const double> x0) {
    nlp_.check_point(x0);
    x_.assign(x0.begin(), x0.end());
    for (int i = 0; i < n_; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (pos_[u] < 0) x_[u] = nlp_.x_lower()[u];
      if (!std::isfinite(x_[u])) throw DataError("initial point is not finite at " + nlp_.variable_name(i));
    }
    const std::size_t nw = lw_.size();
    w_.assign(nw, 0.0);
    for (int p = 0; p < nf_; ++p) w_[static_cast<std::size_t>(p)] = x_[static_cast<std::size_t>(free_[static_cast<std::size_t>(p)])];
    if (!slack_rows_.empty()) {
      try {
        nlp_.constraints(x_, g_);
      } catch (const std::exception&) {
        std::fill(g_.begin(), g_.end(), 0.0);
      }
      for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
        const double v = g_[static_cast<std::size_t>(rows_[static_cast<std::size_t>(slack_rows_[s])])];
        w_[static_cast<std::size_t>(nf_) + s] = std::isfinite(v) ? v : 0.0;
      }
    }
    for (std::size_t i = 0; i < nw; ++i) w_[i] = push_inside(w_[i], lw_[i], uw_[i]);
    zl_.assign(nw, 0.0);
    zu_.assign(nw, 0.0);
    for (std::size_t i = 0; i < nw; ++i) {
      if (std::isfinite(lw_[i])) zl_[i] = o_.z_init;
      if (std::isfinite(uw_[i])) zu_[i] = o_.z_init;
    }
    lam_.assign(static_cast<std::size_t>(ma_), 0.0);
    dw_.assign(nw, 0.0);
    dz_l_.assign(nw, 0.0);
    dz_u_.assign(nw, 0.0);
    dl_.assign(static_cast<std::size_t>(ma_), 0.0);
    gphi_.assign(nw, 0.0);
  }

  double push_inside(double v, double lo, double hi) const {
    const bool fl = std::isfinite(lo), fu = std::isfinite(hi);
    if (fl && fu) {
      const double pl = std::min(o_.bound_push * std::max(1.0, std::abs(lo)), o_.bound_frac * (hi - lo));
      const double pu = std::min(o_.bound_push * std::max(1.0, std::abs(hi)), o_.bound_frac * (hi - lo));
      return std::clamp(v, lo + pl, hi - pu);
    }
    if (fl) return std::max(v, lo + o_.bound_push * std::max(1.0, std::abs(lo)));
    if (fu) return std::min(v, hi - o_.bound_push * std::max(1.0, std::abs(hi)));
    return v;
  }

  // ---- evaluation --------------------------------------------------------------------

  void load_x(std::span<const double> w) {
    for (int p = 0; p < nf_; ++p) x_[static_cast<std::size_t>(free_[static_cast<std::size_t>(p)])] = w[static_cast<std::size_t>(p)];
  }

  bool evaluate_point(std::span<const double> w, double& f, std::vector<double>& c) {
    load_x(w);
    try {
      f = nlp_.objective(x_);
      nlp_.constraints(x_, g_);
    } catch (const std::exception& e) {
      eval_error_ = e.what();
      return false;
    }
    if (!std::isfinite(f)) {
      eval_error_ = "objective is not finite";
      return false;
    }
    c.resize(static_cast<std::size_t>(ma_));
    for (int r = 0; r < ma_; ++r) {
      const auto j = static_cast<std::size_t>(rows_[static_cast<std::size_t>(r)]);
      const double v = g_[j];
      if (!std::isfinite(v)) {
        eval_error_ = "constraint " + nlp_.constraint_name(static_cast<int>(j)) + " is not finite";
        return false;
      }
      const int s = slack_of_[j];
      c[static_cast<std::size_t>(r)] = s < 0 ? v - nlp_.g_lower()[j] : v - w[static_cast<std::size_t>(s)];
    }
    return true;
  }

  bool evaluate_derivatives() {
    load_x(w_);
    for (int r = 0; r < ma_; ++r) lam_full_[static_cast<std::size_t>(rows_[static_cast<std::size_t>(r)])] = lam_[static_cast<std::size_t>(r)];
    try {
      nlp_.gradient(x_, grad_);
      nlp_.jacobian(x_, jac_);
      nlp_.hessian(x_, 1.0, lam_full_, hess_);
    } catch (const std::exception& e) {
      eval_error_ = e.what();
      return false;
    }
    const auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
    };
    if (!finite(grad_) || !finite(jac_) || !finite(hess_)) {
      eval_error_ = "derivatives are not finite";
      return false;
    }
    // Stationarity of the Lagrangian in the reduced variables.
    gl_.assign(lw_.size(), 0.0);
    for (int p = 0; p < nf_; ++p) gl_[static_cast<std::size_t>(p)] = grad_[static_cast<std::size_t>(free_[static_cast<std::size_t>(p)])];
    for (std::size_t p = 0; p < jac_.size(); ++p) {
      const int r = row_pos_[static_cast<std::size_t>(nlp_.jac_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.jac_cols()[p])];
      if (r >= 0 && c >= 0) gl_[static_cast<std::size_t>(c)] += jac_[p] * lam_[static_cast<std::size_t>(r)];
    }
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) gl_[static_cast<std::size_t>(nf_) + s] = -lam_[static_cast<std::size_t>(slack_rows_[s])];
    return true;
  }

  KktResiduals errors(double mu) const {
    KktResiduals e;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      e.stationarity = std::max(e.stationarity, std::abs(gl_[i] - zl_[i] + zu_[i]));
      if (std::isfinite(lw_[i])) e.complementarity = std::max(e.complementarity, std::abs(zl_[i] * (w_[i] - lw_[i]) - mu));
      if (std::isfinite(uw_[i])) e.complementarity = std::max(e.complementarity, std::abs(zu_[i] * (uw_[i] - w_[i]) - mu));
    }
    e.primal = norm_inf(c_);
    return e;
  }

  // ---- barrier quantities ------------------------------------------------------------

  double phi(std::span<const double> w, double f) const {
    double v = f;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const bool fl = std::isfinite(lw_[i]), fu = std::isfinite(uw_[i]);
      if (fl) v -= mu_ * std::log(w[i] - lw_[i]);
      if (fu) v -= mu_ * std::log(uw_[i] - w[i]);
      if (fl && !fu) v += o_.kappa_d * mu_ * (w[i] - lw_[i]);
      if (fu && !fl) v += o_.kappa_d * mu_ * (uw_[i] - w[i]);
    }
    return v;
  }

  void barrier_gradient() {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      double v = i < static_cast<std::size_t>(nf_) ? grad_[static_cast<std::size_t>(free_[i])] : 0.0;
      const bool fl = std::isfinite(lw_[i]), fu = std::isfinite(uw_[i]);
      if (fl) v -= mu_ / (w_[i] - lw_[i]);
      if (fu) v += mu_ / (uw_[i] - w_[i]);
      if (fl && !fu) v += o_.kappa_d * mu_;
      if (fu && !fl) v -= o_.kappa_d * mu_;
      gphi_[i] = v;
    }
  }

  double sigma(std::size_t i) const {
    double s = 0.0;
    if (std::isfinite(lw_[i])) s += zl_[i] / (w_[i] - lw_[i]);
    if (std::isfinite(uw_[i])) s += zu_[i] / (uw_[i] - w_[i]);
    return s;
  }

  // ---- linear algebra ----------------------------------------------------------------

  void assemble_values() {
    double* v = K_.valuePtr();
    std::fill(v, v + K_.nonZeros(), 0.0);
    for (std::size_t p = 0; p < hess_.size(); ++p) if (hess_slot_[p] >= 0) v[hess_slot_[p]] += hess_[p];
    for (std::size_t p = 0; p < jac_.size(); ++p) if (jac_slot_[p] >= 0) v[jac_slot_[p]] += jac_[p];
    base_diag_.resize(diag_slot_.size());
    for (int p = 0; p < nf_; ++p) {
      const auto u = static_cast<std::size_t>(p);
      base_diag_[u] = v[diag_slot_[u]] + sigma(u);
    }
    for (int r = 0; r < ma_; ++r) base_diag_[static_cast<std::size_t>(nf_ + r)] = 0.0;
  }

  void set_regularization(double delta) {
    double* v = K_.valuePtr();
    for (int p = 0; p < nf_; ++p) v[diag_slot_[static_cast<std::size_t>(p)]] = base_diag_[static_cast<std::size_t>(p)] + delta;
    sigma_s_.resize(slack_rows_.size());
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) sigma_s_[s] = sigma(static_cast<std::size_t>(nf_) + s) + delta;
    for (int r = 0; r < ma_; ++r) v[diag_slot_[static_cast<std::size_t>(nf_ + r)]] = -o_.dual_reg;
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
      v[diag_slot_[static_cast<std::size_t>(nf_ + slack_rows_[s])]] -= 1.0 / sigma_s_[s];
    }
  }

  bool inertia_ok() {
    ldlt_.factorize(K_);
    if (ldlt_.info() != Eigen::Success) return false;
    const auto& d = ldlt_.vectorD();
    int neg = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!(std::abs(d[i]) > o_.pivot_tol)) return false;
      neg += d[i] < 0.0;
    }
    return neg == ma_;
  }

  bool factorize_with_inertia(double& delta, double& delta_last) {
    delta = 0.0;
    // An unregularized attempt that failed last time is skipped once.
    if (!zero_failed_) {
      set_regularization(delta);
      if (inertia_ok()) return true;
      zero_failed_ = true;
    } else {
      zero_failed_ = false;
    }
    const bool first = delta_last == 0.0;
    delta = first ? o_.reg_first : std::max(o_.reg_floor, delta_last / 3.0);
    while (delta <= o_.reg_max) {
      set_regularization(delta);
      if (inertia_ok()) {
        delta_last = delta;
        return true;
      }
      delta *= first ? 100.0 : 8.0;
    }
    return false;
  }

  double kkt_residual(const Eigen::VectorXd& rhs, const Eigen::VectorXd& sol) const {
    return (rhs - K_.selfadjointView<Eigen::Lower>() * sol).lpNorm<Eigen::Infinity>();
  }

  Eigen::VectorXd solve_kkt(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd sol = ldlt_.solve(rhs);
    double rnorm = (rhs - K_.selfadjointView<Eigen::Lower>() * sol).lpNorm<Eigen::Infinity>();
    for (int k = 0; k < o_.refinement_steps; ++k) {
      const Eigen::VectorXd res = rhs - K_.selfadjointView<Eigen::Lower>() * sol;
      const Eigen::VectorXd cand = sol + ldlt_.solve(res);
      const double cnorm = (rhs - K_.selfadjointView<Eigen::Lower>() * cand).lpNorm<Eigen::Infinity>();
      if (!(cnorm < rnorm)) break;
      sol = cand;
      rnorm = cnorm;
    }
    return sol;
  }

  // Right-hand side for constraint residual c; stationarity part uses the current point.
  Eigen::VectorXd newton_rhs(const std::vector<double>& c) const {
    Eigen::VectorXd b(nf_ + ma_);
    for (int p = 0; p < nf_; ++p) b[p] = -(gphi_[static_cast<std::size_t>(p)] + gl_[static_cast<std::size_t>(p)] -
                                          grad_[static_cast<std::size_t>(free_[static_cast<std::size_t>(p)])]);
    for (int r = 0; r < ma_; ++r) b[nf_ + r] = -c[static_cast<std::size_t>(r)];
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
      const std::size_t i = static_cast<std::size_t>(nf_) + s;
      const double rs = gphi_[i] - lam_[static_cast<std::size_t>(slack_rows_[s])];
      b[nf_ + slack_rows_[s]] -= rs / sigma_s_[s];
    }
    return b;
  }

  void step_from(const Eigen::VectorXd& sol, std::vector<double>& dw, std::vector<double>& dl) const {
    dw.resize(w_.size());
    dl.resize(static_cast<std::size_t>(ma_));
    for (int p = 0; p < nf_; ++p) dw[static_cast<std::size_t>(p)] = sol[p];
    for (int r = 0; r < ma_; ++r) dl[static_cast<std::size_t>(r)] = sol[nf_ + r];
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
      const std::size_t i = static_cast<std::size_t>(nf_) + s;
      const auto r = static_cast<std::size_t>(slack_rows_[s]);
      const double rs = gphi_[i] - lam_[r];
      dw[i] = (dl[r] - rs) / sigma_s_[s];
    }
  }

  void dual_step(const std::vector<double>& dw, std::vector<double>& dzl, std::vector<double>& dzu) const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      dzl[i] = 0.0;
      dzu[i] = 0.0;
      if (std::isfinite(lw_[i])) {
        const double d = w_[i] - lw_[i];
        dzl[i] = mu_ / d - zl_[i] - zl_[i] / d * dw[i];
      }
      if (std::isfinite(uw_[i])) {
        const double d = uw_[i] - w_[i];
        dzu[i] = mu_ / d - zu_[i] + zu_[i] / d * dw[i];
      }
    }
  }

  double linearized_l1(const std::vector<double>& dw) const {
    std::vector<double> lin = c_;
    for (std::size_t p = 0; p < jac_.size(); ++p) {
      const int r = row_pos_[static_cast<std::size_t>(nlp_.jac_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.jac_cols()[p])];
      if (r >= 0 && c >= 0) lin[static_cast<std::size_t>(r)] += jac_[p] * dw[static_cast<std::size_t>(c)];
    }
    for (std::size_t s = 0; s < slack_rows_.size(); ++s) {
      lin[static_cast<std::size_t>(slack_rows_[s])] -= dw[static_cast<std::size_t>(nf_) + s];
    }
    return norm1(lin);
  }

  double curvature(const std::vector<double>& dw, double delta) const {
    double q = 0.0;
    for (std::size_t p = 0; p < hess_.size(); ++p) {
      const int r = pos_[static_cast<std::size_t>(nlp_.hess_rows()[p])], c = pos_[static_cast<std::size_t>(nlp_.hess_cols()[p])];
      if (r < 0 || c < 0) continue;
      const double t = hess_[p] * dw[static_cast<std::size_t>(r)] * dw[static_cast<std::size_t>(c)];
      q += r == c ? t : 2.0 * t;
    }
    for (std::size_t i = 0; i < w_.size(); ++i) q += (sigma(i) + delta) * dw[i] * dw[i];
    return q;
  }

  // ---- step control ------------------------------------------------------------------

  static double boundary_step(const std::vector<double>& w, const std::vector<double>& dw, const std::vector<double>& lo,
                              const std::vector<double>& hi, double tau) {
    double a = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (dw[i] < 0.0 && std::isfinite(lo[i])) a = std::min(a, -tau * (w[i] - lo[i]) / dw[i]);
      if (dw[i] > 0.0 && std::isfinite(hi[i])) a = std::min(a, tau * (hi[i] - w[i]) / dw[i]);
    }
    return a;
  }

  static double boundary_step_z(const std::vector<double>& z, const std::vector<double>& dz, double tau) {
    double a = 1.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (dz[i] < 0.0 && z[i] > 0.0) a = std::min(a, -tau * z[i] / dz[i]);
    }
    return a;
  }

  // IPOPT-style second-order corrections of a rejected full step.
  bool try_soc(double alpha, const std::vector<double>& c_trial, double tau, double merit0, double slope) {
    std::vector<double> c_soc(c_.size()), ct = c_trial, dw, dl, trial(w_.size());
    for (std::size_t r = 0; r < c_.size(); ++r) c_soc[r] = alpha * c_[r];
    double theta_old = norm1(c_trial), ft = 0.0, a = alpha;
    for (int k = 0; k < o_.max_soc; ++k) {
      for (std::size_t r = 0; r < c_.size(); ++r) c_soc[r] = a * c_soc[r] + ct[r];
      step_from(solve_kkt(newton_rhs(c_soc)), dw, dl);
      a = boundary_step(w_, dw, lw_, uw_, tau);
      axpy(w_, a, dw, trial);
      if (!evaluate_point(trial, ft, ct)) return false;
      const double theta = norm1(ct);
      if (phi(trial, ft) + nu_ * theta <= merit0 + o_.armijo * alpha * slope) {
        std::vector<double> dzl(w_.size()), dzu(w_.size());
        dual_step(dw, dzl, dzu);
        const double az = std::min(boundary_step_z(zl_, dzl, tau), boundary_step_z(zu_, dzu, tau));
        w_ = trial;
        f_ = ft;
        c_ = ct;
        for (std::size_t r = 0; r < lam_.size(); ++r) lam_[r] += a * dl[r];
        for (std::size_t i = 0; i < zl_.size(); ++i) {
          zl_[i] += az * dzl[i];
          zu_[i] += az * dzu[i];
        }
        dw_ = dw;
        soc_alpha_ = a;
        soc_alpha_z_ = az;
        return true;
      }
      if (theta > 0.99 * theta_old) return false;
      theta_old = theta;
    }
    return false;
  }

  void reset_bound_multipliers() {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (std::isfinite(lw_[i])) {
        const double d = w_[i] - lw_[i];
        zl_[i] = std::clamp(zl_[i], mu_ / (o_.kappa_sigma * d), o_.kappa_sigma * mu_ / d);
      }
      if (std::isfinite(uw_[i])) {
        const double d = uw_[i] - w_[i];
        zu_[i] = std::clamp(zu_[i], mu_ / (o_.kappa_sigma * d), o_.kappa_sigma * mu_ / d);
      }
    }
  }

  // ---- output ------------------------------------------------------------------------

  SolveResult& finish(SolveResult& res, std::chrono::steady_clock::time_point t0, bool have_point) {
    res.x.assign(static_cast<std::size_t>(n_), 0.0);
    res.multipliers.lambda.assign(static_cast<std::size_t>(m_), 0.0);
    res.multipliers.z_lower.assign(static_cast<std::size_t>(n_), 0.0);
    res.multipliers.z_upper.assign(static_cast<std::size_t>(n_), 0.0);
    if (have_point) {
      // The iterate is returned as is. It may sit inside the relaxed bounds, and
      // projecting it would break the match with the multipliers.
      load_x(w_);
      res.x.assign(x_.begin(), x_.end());
      for (int r = 0; r < ma_; ++r) res.multipliers.lambda[static_cast<std::size_t>(rows_[static_cast<std::size_t>(r)])] = lam_[static_cast<std::size_t>(r)];
      for (int p = 0; p < nf_; ++p) {
        const auto i = static_cast<std::size_t>(free_[static_cast<std::size_t>(p)]);
        res.multipliers.z_lower[i] = zl_[static_cast<std::size_t>(p)];
        res.multipliers.z_upper[i] = zu_[static_cast<std::size_t>(p)];
      }
      try {
        // Multipliers of fixed variables close the stationarity conditions exactly.
        std::vector<double> grad(static_cast<std::size_t>(n_)), jac(nlp_.jac_nnz());
        nlp_.gradient(res.x, grad);
        nlp_.jacobian(res.x, jac);
        for (std::size_t p = 0; p < jac.size(); ++p) {
          grad[static_cast<std::size_t>(nlp_.jac_cols()[p])] += jac[p] * res.multipliers.lambda[static_cast<std::size_t>(nlp_.jac_rows()[p])];
        }
        for (int i = 0; i < n_; ++i) {
          const auto u = static_cast<std::size_t>(i);
          if (pos_[u] >= 0) continue;
          res.multipliers.z_lower[u] = std::max(0.0, grad[u]);
          res.multipliers.z_upper[u] = std::max(0.0, -grad[u]);
        }
        res.objective = nlp_.objective(res.x);
        res.residuals = kkt_report(nlp_, res.x, res.multipliers);
      } catch (const std::exception& e) {
        res.status = Status::error;
        res.message = std::string("evaluation failed at the final point: ") + e.what();
      }
    } else {
      res.x.assign(x_.begin(), x_.end());
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.time_per_iteration = res.iterations > 0 ? res.wall_time / res.iterations : res.wall_time;
    return res;
  }

  void log_header() const {
    if (o_.log) *o_.log << "iter    objective    inf_pr   inf_du lg(mu)  ||d||  lg(rg) alpha_du alpha_pr  ls\n";
  }

  void log_line(const IterationRecord& r) const {
    if (!o_.log) return;
    char buf[160];
    const std::string rg = r.regularization > 0.0 ? fmt1(std::log10(r.regularization)) : "   -";
    std::snprintf(buf, sizeof buf, "%4d %13.7e %8.2e %8.2e %5.1f %8.2e %6s %8.2e %8.2e %3d%s\n", r.iter, r.objective, r.primal,
                  r.dual, std::log10(std::max(r.mu, 1e-300)), r.step_norm, rg.c_str(), r.alpha_dual, r.alpha_primal,
                  r.backtracks, r.soc ? "s" : "");
    *o_.log << buf;
  }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
  static std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
  }

  static double norm_inf(const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a = std::max(a, std::abs(x));
    return a;
  }
  static double norm1(const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += std::abs(x);
    return a;
  }
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  static void axpy(const std::vector<double>& w, double a, const std::vector<double>& d, std::vector<double>& out) {
    out.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] + a * d[i];
  }

  const transcribe::SparseNlp& nlp_;
  SolverOptions o_;
  int n_ = 0, m_ = 0, nf_ = 0, ma_ = 0;
  std::vector<int> free_, pos_, rows_, row_pos_, slack_of_, slack_rows_;
  std::vector<double> lw_, uw_;

  std::vector<double> x_, w_, zl_, zu_, lam_, lam_full_;
  std::vector<double> grad_, g_, jac_, hess_, c_, gl_, gphi_;
  std::vector<double> dw_, dl_, dz_l_, dz_u_, sigma_s_, base_diag_;
  double f_ = 0.0, mu_ = 0.0, nu_ = 0.0, soc_alpha_ = 0.0, soc_alpha_z_ = 0.0;
  std::string eval_error_;
  bool zero_failed_ = false;

  SpMat K_;
  std::vector<int> diag_slot_, hess_slot_, jac_slot_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace detail

/// Local solution of nlp from x0. Fixed variables (x_l = x_u) are held at their value.
inline SolveResult solve(const transcribe::SparseNlp& nlp, std::span<const double> x0, const SolverOptions& opts = {}) {
  opts.validate();
  nlp.check_point(x0);
  detail::InteriorPoint ip(nlp, opts);
  return ip.run(x0);
}

}  // namespace stes::solve
