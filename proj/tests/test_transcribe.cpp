#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "stes/scenario/synthetic.hpp"
#include "stes/sim/integrator.hpp"
#include "stes/transcribe/energy_nlp.hpp"
#include "stes/transcribe/summary.hpp"

using namespace stes;
using namespace stes::transcribe;

namespace {

const ts::ExogenousData& year() {
  static const auto d = scenario::synthetic_year();
  return d;
}

ProblemSpec make_spec(int hours, Variant v = Variant::full, std::size_t first = 2400) {
  ProblemSpec s;
  s.data = year().slice(first, static_cast<std::size_t>(hours));
  s.grid.n_fine = hours;
  s.variant = v;
  return s;
}

ts::ExogenousData constant_data(int hours, double t_amb = 6.0) {
  const auto c = [&](double v, ts::Unit u) { return ts::HourlySeries(u, std::vector<double>(static_cast<std::size_t>(hours), v)); };
  return {c(t_amb, ts::Unit::Celsius), c(4e6, ts::Unit::Watt), c(2e6, ts::Unit::Watt), c(3.5e6, ts::Unit::Watt),
          c(5e6, ts::Unit::Watt)};
}

std::vector<double> random_point(const SparseNlp& nlp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(nlp.n()));
  for (int i = 0; i < nlp.n(); ++i) {
    const double lo = nlp.x_lower()[static_cast<std::size_t>(i)], hi = nlp.x_upper()[static_cast<std::size_t>(i)];
    if (lo == hi) {
      x[static_cast<std::size_t>(i)] = lo;
    } else if (std::isinf(lo) && std::isinf(hi)) {
      x[static_cast<std::size_t>(i)] = 0.1 + 0.4 * u(rng);  // ground, 10..50 degC
    } else if (std::isinf(hi)) {
      x[static_cast<std::size_t>(i)] = lo + 2.0 * u(rng);
    } else if (hi == model::DesignVector::kMax) {
      x[static_cast<std::size_t>(i)] = 0.5 + 2.5 * u(rng);
    } else {
      x[static_cast<std::size_t>(i)] = lo + (hi - lo) * (0.05 + 0.9 * u(rng));
    }
  }
  return x;
}

std::vector<double> jac_times(const SparseNlp& nlp, const std::vector<double>& vals, const std::vector<double>& v) {
  std::vector<double> r(static_cast<std::size_t>(nlp.m()), 0.0);
  for (std::size_t p = 0; p < vals.size(); ++p) {
    r[static_cast<std::size_t>(nlp.jac_rows()[p])] += vals[p] * v[static_cast<std::size_t>(nlp.jac_cols()[p])];
  }
  return r;
}

std::vector<double> jac_transpose_times(const SparseNlp& nlp, const std::vector<double>& x, const std::vector<double>& l) {
  std::vector<double> vals(nlp.jac_nnz());
  nlp.jacobian(x, vals);
  std::vector<double> r(static_cast<std::size_t>(nlp.n()), 0.0);
  for (std::size_t p = 0; p < vals.size(); ++p) {
    r[static_cast<std::size_t>(nlp.jac_cols()[p])] += vals[p] * l[static_cast<std::size_t>(nlp.jac_rows()[p])];
  }
  return r;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

std::vector<double> constraints_at(const SparseNlp& nlp, const std::vector<double>& x) {
  std::vector<double> g(static_cast<std::size_t>(nlp.m()));
  nlp.constraints(x, g);
  return g;
}

// Directional checks of the Jacobian and the Lagrangian Hessian against central differences.
void directional_checks(const SparseNlp& nlp, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double eps = 1e-6;
  for (int t = 0; t < points; ++t) {
    const auto x = random_point(nlp, rng);
    std::vector<double> v(x.size()), lam(static_cast<std::size_t>(nlp.m()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = nlp.x_lower()[i] == nlp.x_upper()[i] ? 0.0 : gauss(rng) * 0.01;
    }
    for (double& l : lam) l = gauss(rng);
    auto xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += eps * v[i];
      xm[i] -= eps * v[i];
    }
    std::vector<double> jv(nlp.jac_nnz());
    nlp.jacobian(x, jv);
    const auto an = jac_times(nlp, jv, v);
    const auto gp = constraints_at(nlp, xp), gm = constraints_at(nlp, xm);
    std::vector<double> diff(an.size());
    for (std::size_t r = 0; r < an.size(); ++r) diff[r] = an[r] - (gp[r] - gm[r]) / (2 * eps);
    ASSERT_LE(inf_norm(diff), 1e-6 * inf_norm(an)) << "Jacobian at point " << t;

    std::vector<double> hv(nlp.hess_nnz());
    nlp.hessian(x, 1.0, lam, hv);
    std::vector<double> hx(x.size(), 0.0);
    for (std::size_t p = 0; p < hv.size(); ++p) {
      const auto r = static_cast<std::size_t>(nlp.hess_rows()[p]), c = static_cast<std::size_t>(nlp.hess_cols()[p]);
      hx[r] += hv[p] * v[c];
      if (r != c) hx[c] += hv[p] * v[r];
    }
    const auto tp = jac_transpose_times(nlp, xp, lam), tm = jac_transpose_times(nlp, xm, lam);
    std::vector<double> hdiff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) hdiff[i] = hx[i] - (tp[i] - tm[i]) / (2 * eps);
    ASSERT_LE(inf_norm(hdiff), 1e-6 * std::max(inf_norm(hx), 1e-300)) << "Hessian at point " << t;
  }
}

}  // namespace

TEST(Counts, DefaultYear) {
  ProblemSpec s;
  s.data = year();
  const auto full = build_full_nlp(s);
  EXPECT_EQ(full.n(), 105132);
  EXPECT_LE(std::abs(full.n() - 105130), 5);
  EXPECT_EQ(full.formula_variable_count(), 105125);
  const auto avg = build_averaged_nlp(s);
  EXPECT_EQ(avg.n(), 54762);
  EXPECT_EQ(avg.formula_variable_count(), 54755);
  const double reduction = 1.0 - static_cast<double>(avg.n()) / full.n();
  EXPECT_NEAR(reduction, 0.48, 0.01);
  const auto j = problem_summary(full);
  EXPECT_EQ(j["variables"]["total"].get<int>(), 105132);
  EXPECT_EQ(j["constraints"]["by_kind"]["thermal_defect"].get<int>(), 8760 * 6);
}

TEST(Counts, ToyDayClosedForm) {
  const auto nlp = build_full_nlp(make_spec(24));
  EXPECT_EQ(nlp.n(), 25 * 7 + 24 * 5 + 5);
  EXPECT_EQ(nlp.n(), 300);
  const auto avg = build_averaged_nlp(make_spec(24));
  EXPECT_EQ(avg.n(), 2 * 6 + 25 + 24 * 5 + 5);
}

TEST(Variants, StructureAndFixedScales) {
  const auto no_ptes = build_full_nlp(make_spec(48, Variant::no_ptes));
  EXPECT_EQ(no_ptes.thermal_nodes(), 0);
  for (int i = 0; i < no_ptes.n(); ++i) EXPECT_NE(no_ptes.variable_name(i).substr(0, 2), "T_");
  const int ss = no_ptes.theta_index(3);
  EXPECT_EQ(no_ptes.x_lower()[static_cast<std::size_t>(ss)], 0.0);
  EXPECT_EQ(no_ptes.x_upper()[static_cast<std::size_t>(ss)], 0.0);
  // Direct supply at 40 degC: COP above the storage-charging COP.
  const auto full = build_full_nlp(make_spec(48));
  EXPECT_GT(no_ptes.cop(0), full.cop(0));
  EXPECT_NEAR(no_ptes.cop(0), model::cop(year().t_amb[2400], 0.5, 40.0), 1e-12);

  const auto no_wind = build_full_nlp(make_spec(48, Variant::no_wind));
  EXPECT_EQ(no_wind.x_upper()[static_cast<std::size_t>(no_wind.theta_index(1))], 0.0);
  EXPECT_EQ(no_wind.n(), full.n());

  const auto only_hp = build_averaged_nlp(make_spec(48, Variant::only_hp));
  EXPECT_EQ(only_hp.n(), 48 * 3 + 5);
  for (int i : {0, 1, 2, 3}) EXPECT_EQ(only_hp.x_upper()[static_cast<std::size_t>(only_hp.theta_index(i))], 0.0);
  EXPECT_EQ(only_hp.x_upper()[static_cast<std::size_t>(only_hp.theta_index(4))], model::DesignVector::kMax);
  EXPECT_EQ(parse_variant("no-wind"), Variant::no_wind);
  EXPECT_THROW(parse_variant("solar"), ConfigError);
}

TEST(Errors, LengthAndGrid) {
  auto s = make_spec(48);
  s.grid.n_fine = 47;
  EXPECT_THROW(build_full_nlp(s), DataError);
  auto t = make_spec(50);
  EXPECT_THROW(build_averaged_nlp(t), ConfigError);
  EXPECT_NO_THROW(build_full_nlp(t));
  const auto nlp = build_full_nlp(make_spec(24));
  std::vector<double> wrong(10);
  EXPECT_THROW(nlp.objective(wrong), DataError);
}

TEST(Defects, SimulatedTrajectoryIsFeasibleFull) {
  const int hours = 96;
  const auto spec = make_spec(hours);
  const auto nlp = build_full_nlp(spec);
  const model::DesignVector d{1.1, 0.9, 0.8, 1.3, 1.2};
  const auto& sys = spec.system;
  sim::ThermalStepper st(sys.network(d.s_s), sys.dynamics());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  Solution s;
  s.design = d;
  std::vector<double> x{70, 60, 45, 30, 25, 14};
  s.temperatures.push_back(x);
  s.soc.push_back(0.4);
  for (int k = 0; k < hours; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    model::ControlVector c;
    c.p_hp = 3e6 * u(rng);
    c.p_b_plus = 1e6 * u(rng);
    c.p_b_minus = 1e6 * u(rng);
    const double net = d.s_pv * spec.data.p_pv0[ku] + d.s_wind * spec.data.p_wind0[ku] - spec.data.p_load[ku] - c.p_hp -
                       c.p_b_plus + c.p_b_minus;
    (net > 0 ? c.p_grid_minus : c.p_grid_plus) = std::abs(net);
    s.controls.push_back(c);
    const double q = model::cop(spec.data.t_amb[ku], sys.heat_pump) * c.p_hp;
    x = st.step(x, q, {spec.data.q_load[ku], spec.data.t_amb[ku]}, 3600.0);
    s.temperatures.push_back(x);
    s.soc.push_back(s.soc.back() + (0.95 * c.p_b_plus - c.p_b_minus / 0.95) / (d.s_b * 10e6));
  }
  const auto g = constraints_at(nlp, nlp.pack(s));
  int checked = 0;
  for (int r = 0; r < nlp.m(); ++r) {
    const auto k = nlp.row_kind(r);
    if (k == RowKind::thermal_defect || k == RowKind::battery_defect || k == RowKind::power_balance) {
      EXPECT_LE(std::abs(g[static_cast<std::size_t>(r)]), 1e-8) << nlp.constraint_name(r);
      ++checked;
    }
  }
  EXPECT_EQ(checked, hours * 8);
  const auto back = nlp.extract(nlp.pack(s));
  EXPECT_NEAR(back.temperatures[17][2], s.temperatures[17][2], 1e-12);
  EXPECT_NEAR(back.controls[5].p_grid_plus, s.controls[5].p_grid_plus, 1e-6);
}

TEST(Defects, SimulatedTrajectoryIsFeasibleAveraged) {
  const int hours = 24 * 5;
  const auto spec = make_spec(hours);
  const auto nlp = build_averaged_nlp(spec);
  const model::DesignVector d{1, 1, 1, 0.7, 1};
  const auto& sys = spec.system;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Solution s;
  s.design = d;
  std::vector<double> php;
  for (int k = 0; k < hours; ++k) {
    model::ControlVector c;
    c.p_hp = 4e6 * u(rng);
    php.push_back(c.p_hp);
    s.controls.push_back(c);
    s.soc.push_back(0.5);
  }
  s.soc.push_back(0.5);
  const auto avg = average_inputs(spec.data.q_load.values(), spec.data.t_amb.values(), sys.heat_pump, spec.grid);
  sim::ThermalStepper st(sys.network(d.s_s), sys.dynamics());
  std::vector<double> x{55, 50, 40, 35, 22, 15};
  s.temperatures.push_back(x);
  for (int j = 0; j < spec.grid.n_coarse(); ++j) {
    x = st.step(x, avg.q_hp(j, php), {avg.q_load[static_cast<std::size_t>(j)], avg.t_amb[static_cast<std::size_t>(j)]}, 86400.0);
    s.temperatures.push_back(x);
  }
  const auto g = constraints_at(nlp, nlp.pack(s));
  for (int r = 0; r < nlp.m(); ++r) {
    if (nlp.row_kind(r) == RowKind::thermal_defect) {
      EXPECT_LE(std::abs(g[static_cast<std::size_t>(r)]), 1e-8);
    }
  }
}

TEST(Derivatives, EntrywiseAgainstFiniteDifferences) {
  for (auto form : {Form::full, Form::averaged}) {
    for (auto v : {Variant::full, Variant::no_ptes, Variant::only_hp}) {
      const EnergyNlp nlp(make_spec(48, v), form);
      std::mt19937_64 rng(11);
      const auto x = random_point(nlp, rng);
      std::vector<double> vals(nlp.jac_nnz());
      nlp.jacobian(x, vals);
      std::vector<double> dense(static_cast<std::size_t>(nlp.n()) * static_cast<std::size_t>(nlp.m()), 0.0);
      for (std::size_t p = 0; p < vals.size(); ++p) {
        dense[static_cast<std::size_t>(nlp.jac_cols()[p]) * static_cast<std::size_t>(nlp.m()) +
              static_cast<std::size_t>(nlp.jac_rows()[p])] += vals[p];
      }
      for (int c = 0; c < nlp.n(); ++c) {
        auto xp = x, xm = x;
        const double h = 1e-6;
        xp[static_cast<std::size_t>(c)] += h;
        xm[static_cast<std::size_t>(c)] -= h;
        const auto gp = constraints_at(nlp, xp), gm = constraints_at(nlp, xm);
        for (int r = 0; r < nlp.m(); ++r) {
          const double fd = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) / (2 * h);
          const double an = dense[static_cast<std::size_t>(c) * static_cast<std::size_t>(nlp.m()) + static_cast<std::size_t>(r)];
          ASSERT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(an))) << nlp.constraint_name(r) << " / " << nlp.variable_name(c);
        }
      }
    }
  }
}

TEST(Derivatives, DirectionalAtHundredRandomPoints) {
  directional_checks(build_full_nlp(make_spec(72)), 100, 21);
  directional_checks(build_averaged_nlp(make_spec(72)), 100, 22);
  directional_checks(build_averaged_nlp(make_spec(72, Variant::no_ptes)), 20, 23);
}

TEST(Derivatives, PatternEntriesAreExercised) {
  for (auto form : {Form::full, Form::averaged}) {
    const EnergyNlp nlp(make_spec(48), form);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<bool> jac_hit(nlp.jac_nnz(), false), hess_hit(nlp.hess_nnz(), false);
    for (int t = 0; t < 10; ++t) {
      const auto x = random_point(nlp, rng);
      std::vector<double> lam(static_cast<std::size_t>(nlp.m()));
      for (double& l : lam) l = gauss(rng);
      std::vector<double> jv(nlp.jac_nnz()), hv(nlp.hess_nnz());
      nlp.jacobian(x, jv);
      nlp.hessian(x, 1.0, lam, hv);
      for (std::size_t p = 0; p < jv.size(); ++p) jac_hit[p] = jac_hit[p] || jv[p] != 0.0;
      for (std::size_t p = 0; p < hv.size(); ++p) hess_hit[p] = hess_hit[p] || hv[p] != 0.0;
    }
    EXPECT_EQ(std::count(jac_hit.begin(), jac_hit.end(), false), 0);
    EXPECT_EQ(std::count(hess_hit.begin(), hess_hit.end(), false), 0);
    std::set<std::pair<int, int>> seen;
    for (std::size_t p = 0; p < nlp.hess_nnz(); ++p) {
      EXPECT_GE(nlp.hess_rows()[p], nlp.hess_cols()[p]);
      EXPECT_TRUE(seen.insert({nlp.hess_rows()[p], nlp.hess_cols()[p]}).second);
    }
  }
}

TEST(Objective, ValuesAndGradient) {
  ProblemSpec s;
  s.data = year();
  const auto nlp = build_full_nlp(s);
  auto x = nlp.initial_guess();
  const auto f = econ::fixed_cost({1, 1, 1, 1, 1}, nlp.capacities(), s.costs);
  EXPECT_NEAR(nlp.objective_eur(x), f.j_fix, 1e-6 * f.j_fix);

  for (int i = 0; i < 5; ++i) x[static_cast<std::size_t>(nlp.theta_index(i))] = 0.0;
  x[static_cast<std::size_t>(nlp.control_index(100, EnergyNlp::kPgPlus))] = 1.0;  // 1 MW for one hour
  EXPECT_NEAR(nlp.objective_eur(x), 300.0, 1e-9);

  const auto [val, grad] = objective_and_gradient(nlp, x);
  EXPECT_NEAR(val, 300.0, 1e-9);
  for (int k : {0, 4000, 8759}) {
    EXPECT_NEAR(grad[static_cast<std::size_t>(nlp.control_index(k, EnergyNlp::kPgPlus))], 300.0, 1e-9);
    EXPECT_NEAR(grad[static_cast<std::size_t>(nlp.control_index(k, EnergyNlp::kPgMinus))], -10.0, 1e-9);
  }
  const auto gfix = econ::fixed_cost_gradient(nlp.capacities(), s.costs);
  EXPECT_NEAR(grad[static_cast<std::size_t>(nlp.theta_index(3))], gfix[3], 1e-6 * gfix[3]);
}

TEST(Objective, FullAndAveragedAgreeOnSharedControls) {
  const auto spec = make_spec(72);
  const auto full = build_full_nlp(spec);
  const auto avg = build_averaged_nlp(spec);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    const auto xf = random_point(full, rng);
    auto sol = full.extract(xf);
    auto sa = sol;
    sa.temperatures.resize(static_cast<std::size_t>(avg.thermal_nodes()));
    const auto xa = avg.pack(sa);
    EXPECT_NEAR(full.objective(xf), avg.objective(xa), 1e-12 * std::abs(full.objective(xf)));
  }
}

TEST(InitialGuess, FlatAndClipped) {
  const auto nlp = build_full_nlp(make_spec(24));
  const auto x = nlp.initial_guess();
  for (int j = 0; j < nlp.thermal_nodes(); ++j) {
    EXPECT_DOUBLE_EQ(x[static_cast<std::size_t>(nlp.temp_index(j, 0))], 0.40);  // top layer limit
    for (int i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(x[static_cast<std::size_t>(nlp.temp_index(j, i))], 0.30);
    for (int i = 4; i < 6; ++i) EXPECT_DOUBLE_EQ(x[static_cast<std::size_t>(nlp.temp_index(j, i))], 0.135);
  }
  for (int i = 0; i < 5; ++i) EXPECT_EQ(x[static_cast<std::size_t>(nlp.theta_index(i))], 1.0);
  for (int i = 0; i < nlp.n(); ++i) {
    EXPECT_GE(x[static_cast<std::size_t>(i)], nlp.x_lower()[static_cast<std::size_t>(i)]);
    EXPECT_LE(x[static_cast<std::size_t>(i)], nlp.x_upper()[static_cast<std::size_t>(i)]);
  }
}

TEST(Averaging, ExamplesAndExactness) {
  GridSpec g;
  g.n_fine = 24;
  model::HeatPumpParams hp;
  std::vector<double> t(24, 7.0), q(24, 0.0), p(24, 2e6);
  q[23] = 24e6;
  const auto a = average_inputs(q, t, hp, g);
  EXPECT_DOUBLE_EQ(a.q_load[0], 1e6);
  EXPECT_NEAR(a.q_hp(0, p), model::cop(7.0, hp) * 2e6, 1e-6);

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-10.0, 30.0);
  for (auto& v : t) v = u(rng);
  for (auto& v : p) v = 1e6 * (u(rng) + 10.0);
  const auto b = average_inputs(q, t, hp, g);
  // Piecewise-constant quadrature of COP(t) P(t) over the day, one-minute resolution.
  double integral = 0.0;
  for (int minute = 0; minute < 24 * 60; ++minute) {
    const auto i = static_cast<std::size_t>(minute / 60);
    integral += 0.5 * (model::kKelvinOffset + 86.0) / (86.0 - t[i]) * p[i] * 60.0;
  }
  EXPECT_NEAR(b.q_hp(0, p), integral / 86400.0, 1e-12 * integral / 86400.0);

  // Linearity in (Q_load, P_hp).
  std::vector<double> q2(24), p2(24), qs(24), ps(24);
  for (int i = 0; i < 24; ++i) {
    q2[static_cast<std::size_t>(i)] = 1e6 * (u(rng) + 10);
    p2[static_cast<std::size_t>(i)] = 1e6 * (u(rng) + 10);
    qs[static_cast<std::size_t>(i)] = 2.0 * q[static_cast<std::size_t>(i)] - 3.0 * q2[static_cast<std::size_t>(i)];
    ps[static_cast<std::size_t>(i)] = 2.0 * p[static_cast<std::size_t>(i)] - 3.0 * p2[static_cast<std::size_t>(i)];
  }
  const auto c2 = average_inputs(q2, t, hp, g), cs = average_inputs(qs, t, hp, g);
  EXPECT_NEAR(cs.q_load[0], 2.0 * b.q_load[0] - 3.0 * c2.q_load[0], 1e-12 * std::abs(c2.q_load[0]) * 5);
  EXPECT_NEAR(cs.q_hp(0, ps), 2.0 * b.q_hp(0, p) - 3.0 * c2.q_hp(0, p2), 1e-12 * std::abs(c2.q_hp(0, p2)) * 5);
  g.n_fine = 30;
  EXPECT_THROW(average_inputs(std::vector<double>(30, 0.0), std::vector<double>(30, 0.0), hp, g), ConfigError);
}

TEST(Averaging, ConstantDayMatchesOneLongStep) {
  // One day of constant inputs: the averaged problem and a full problem with a
  // single 24 h interval produce identical storage defects.
  ProblemSpec fs, as;
  fs.data = constant_data(1);
  fs.grid = {1, 86400.0, 1};
  as.data = constant_data(24);
  as.grid = {24, 3600.0, 24};
  const auto full = build_full_nlp(fs);
  const auto avg = build_averaged_nlp(as);
  std::mt19937_64 rng(29);
  for (int t = 0; t < 10; ++t) {
    const auto xa = random_point(avg, rng);
    auto sa = avg.extract(xa);
    const double p = sa.controls[0].p_hp;
    for (auto& c : sa.controls) c.p_hp = p;
    Solution sf = sa;
    sf.controls.resize(1);
    sf.soc.resize(2);
    const auto ga = constraints_at(avg, avg.pack(sa)), gf = constraints_at(full, full.pack(sf));
    std::vector<double> da, df;
    for (int r = 0; r < avg.m(); ++r) {
      if (avg.row_kind(r) == RowKind::thermal_defect) da.push_back(ga[static_cast<std::size_t>(r)]);
    }
    for (int r = 0; r < full.m(); ++r) {
      if (full.row_kind(r) == RowKind::thermal_defect) df.push_back(gf[static_cast<std::size_t>(r)]);
    }
    ASSERT_EQ(da.size(), df.size());
    for (std::size_t i = 0; i < da.size(); ++i) EXPECT_NEAR(da[i], df[i], 1e-12);
  }
}
