#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "stes/scenario/synthetic.hpp"
#include "stes/sim/analysis.hpp"
#include "stes/sim/integrator.hpp"
#include "stes/sim/schedule.hpp"

using namespace stes;
using namespace stes::sim;

namespace {

const ts::ExogenousData& year_data() {
  static const auto d = scenario::synthetic_year();
  return d;
}

std::vector<double> to_vec(const ts::HourlySeries& s) { return {s.values().begin(), s.values().end()}; }

std::vector<IntervalInput> default_inputs(const model::SystemParams& sys) {
  const auto q = to_vec(year_data().q_load), t = to_vec(year_data().t_amb);
  return make_inputs(default_hp_heat(sys.network(), q, t, 3600.0), q, t);
}

ThermalNetwork decay_network(double tau) {
  ThermalNetwork net;
  net.storage_layers = 1;
  net.ground_layers = 1;
  net.c_storage = {1e9};
  net.c_ground = {1e9};
  net.g_top = 1e9 / tau;
  net.g_wall_ground = {0.0};
  net.g_ground = {0.0};
  net.t_boundary = 0.0;
  return net;
}

}  // namespace

TEST(ImplicitEuler, EquilibriumIsFixedPoint) {
  model::SystemParams sys;
  ThermalStepper st(sys.network(), sys.dynamics());
  const std::vector<double> x(6, 13.5);
  const auto y = st.step(x, 0.0, {0.0, 13.5}, 3600.0);
  for (double v : y) EXPECT_EQ(v, 13.5);
}

TEST(ImplicitEuler, LinearDecayHalvesAtTau) {
  const double tau = 5000.0;
  ThermalStepper st(decay_network(tau), DynamicsConfig{});
  const std::vector<double> x{40.0, 0.0};
  const auto y = st.step(x, 0.0, {0.0, 0.0}, tau);
  EXPECT_NEAR(y[0], 20.0, 1e-10);
}

TEST(ImplicitEuler, MatchesFineRk4OverOneHour) {
  model::SystemParams sys;
  const auto net = sys.network(1.2);
  ThermalStepper st(net, sys.dynamics());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(15.0, 80.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x;
    for (int i = 0; i < 6; ++i) x.push_back(u(rng));
    const double q = 1e7 * std::uniform_real_distribution<double>(0, 1)(rng);
    const StorageForcing in{8e6 * std::uniform_real_distribution<double>(0, 1)(rng), 5.0};
    const auto y = st.step(x, q, in, 3600.0);
    std::vector<double> r = x;
    for (int s = 0; s < 3600; ++s) r = rk4_step(r, q, in, 1.0, net, sys.dynamics());
    for (int i = 0; i < 6; ++i) EXPECT_LE(std::abs(y[i] - r[i]), 0.05);
  }
}

TEST(ImplicitEuler, NonConvergenceIsReported) {
  model::SystemParams sys;
  NewtonOptions opts;
  opts.tol = 0.0;
  opts.max_iterations = 3;
  ThermalStepper st(sys.network(), sys.dynamics(), opts);
  const std::vector<double> x{60, 50, 40, 30, 20, 15};
  EXPECT_THROW(st.step(x, 5e6, {1e6, 0.0}, 3600.0), ConvergenceError);
}

TEST(ImplicitEuler, SparsePathAgreesWithDense) {
  model::SystemParams sys;
  sys.ground.layers = 60;
  NewtonOptions dense, sparse;
  dense.dense_limit = 1000;
  sparse.dense_limit = 0;
  ThermalStepper a(sys.network(), sys.dynamics(), dense), b(sys.network(), sys.dynamics(), sparse);
  std::vector<double> x(64, 13.5);
  x[0] = 70;
  x[1] = 60;
  x[2] = 50;
  x[3] = 40;
  for (int k = 0; k < 5; ++k) {
    const auto ya = a.step(x, 4e6, {2e6, 1.0}, 3600.0);
    const auto yb = b.step(x, 4e6, {2e6, 1.0}, 3600.0);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(ya[i], yb[i], 1e-9);
    x = ya;
  }
}

TEST(SimulateYear, ZeroForcingRelaxesMonotonically) {
  model::SystemParams sys;
  ThermalStepper st(sys.network(), sys.dynamics());
  model::SystemState x0;
  x0.t_storage = {80, 60, 30, 20};
  x0.t_ground = {40, 13.5};
  std::vector<IntervalInput> in(2000, IntervalInput{0.0, 0.0, 13.5, 0.0, 0.0});
  const auto tr = simulate(st, x0, in, 3600.0);
  double prev_max = 1e9, prev_min = -1e9;
  for (const auto& s : tr.states) {
    const auto x = s.thermal();
    const double mx = std::max(*std::max_element(x.begin(), x.end()), 13.5);
    const double mn = std::min(*std::min_element(x.begin(), x.end()), 13.5);
    EXPECT_LE(mx, prev_max + 1e-12);
    EXPECT_GE(mn, prev_min - 1e-12);
    prev_max = mx;
    prev_min = mn;
  }
  EXPECT_EQ(tr.states.size(), in.size() + 1);
}

TEST(SimulateYear, EnergyAuditAndBattery) {
  model::SystemParams sys;
  auto in = default_inputs(sys);
  for (std::size_t k = 0; k < in.size(); ++k) {
    in[k].p_b_plus = k % 2 ? 1e6 : 0.0;
    in[k].p_b_minus = k % 2 ? 0.0 : 0.9e6;
  }
  ThermalStepper st(sys.network(), sys.dynamics());
  const auto x0 = model::SystemState::uniform(4, 2, schedule_target(0.0, {}), 13.5);
  const auto tr = simulate(st, x0, in, 3600.0, 1, &sys.battery, 1.0);
  const auto audit = energy_audit(tr, st.network());
  EXPECT_LE(audit.relative_error(), 1e-3);
  EXPECT_LE(audit.relative_error(), 1e-9);
  double expected_soc = 0.5;
  for (const auto& i : in) expected_soc += (i.p_b_plus * 0.95 - i.p_b_minus / 0.95) / 10e6;
  EXPECT_NEAR(tr.states.back().soc, expected_soc, 1e-9);
  std::vector<IntervalInput> short_in(in.begin(), in.begin() + 100);
  const auto path = std::filesystem::path(STES_TEST_TMP) / "traj.csv";
  std::filesystem::create_directories(path.parent_path());
  write_trajectory_csv(path.string(), simulate(st, x0, short_in, 3600.0));
  EXPECT_TRUE(std::filesystem::exists(path));
}

TEST(SimulateYear, YearOverYearContraction) {
  model::SystemParams sys;
  const auto in = default_inputs(sys);
  ThermalStepper st(sys.network(), sys.dynamics());
  auto x = model::SystemState::uniform(4, 2, 30.0, 13.5);
  double prev = 1e9;
  for (int y = 0; y < 4; ++y) {
    const auto tr = simulate(st, x, in, 3600.0);
    const auto a = x.thermal(), b = tr.states.back().thermal();
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    EXPECT_LT(diff, prev);
    prev = diff;
    x = tr.states.back();
  }
}

TEST(SimulateYear, HalvingTheStepHalvesTheError) {
  // Inputs constant over 4 h blocks so that h in {4 h, 2 h, 1 h} sees identical forcing.
  model::SystemParams sys;
  const auto hourly = default_inputs(sys);
  std::vector<IntervalInput> blocks;
  for (std::size_t k = 0; k + 4 <= hourly.size(); k += 4) blocks.push_back(hourly[k]);
  const auto net = sys.network();
  const auto x0 = model::SystemState::uniform(4, 2, schedule_target(0.0, {}), 13.5);
  const auto ref = simulate_rk4(net, sys.dynamics(), x0.thermal(), blocks, 4 * 3600.0, 240);
  std::vector<double> errs;
  for (int sub : {1, 2, 4}) {
    ThermalStepper st(net, sys.dynamics());
    const auto tr = simulate(st, x0, blocks, 4 * 3600.0, sub);
    double e = 0.0;
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const auto x = tr.states[k].thermal();
      for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - ref[k][i]));
    }
    errs.push_back(e);
  }
  for (int i = 0; i < 2; ++i) {
    const double ratio = errs[i] / errs[i + 1];
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 2.5);
  }
}

TEST(SimulateYear, StableForDailySteps) {
  model::SystemParams sys;
  const auto hourly = default_inputs(sys);
  std::vector<IntervalInput> daily;
  for (std::size_t k = 0; k < hourly.size(); k += 24) daily.push_back(hourly[k]);
  ThermalStepper st(sys.network(), sys.dynamics());
  const auto tr = simulate(st, model::SystemState::uniform(4, 2, 40.0, 13.5), daily, 86400.0);
  for (const auto& s : tr.states) {
    for (double v : s.thermal()) {
      EXPECT_GT(v, kSanityMin);
      EXPECT_LT(v, kSanityMax);
    }
  }
}

TEST(PeriodicSteadyState, ConstantInputsReachEquilibrium) {
  model::SystemParams sys;
  ThermalStepper st(sys.network(), sys.dynamics());
  std::vector<IntervalInput> in(8760, IntervalInput{0.0, 0.0, 13.5, 0.0, 0.0});
  const auto res = periodic_steady_state(st, model::SystemState::uniform(4, 2, 30.0, 13.5), in, 3600.0, 1e-3);
  for (double v : res.state.thermal()) EXPECT_NEAR(v, 13.5, 0.02);
}

TEST(PeriodicSteadyState, DefinitionToleranceAndRotation) {
  model::SystemParams sys;
  const auto in = default_inputs(sys);
  ThermalStepper st(sys.network(), sys.dynamics());
  const auto guess = model::SystemState::uniform(4, 2, 45.0, 13.5);
  const auto coarse = periodic_steady_state(st, guess, in, 3600.0, 1e-3);
  const auto fine = periodic_steady_state(st, coarse.state, in, 3600.0, 1e-6);
  const auto tr = simulate(st, coarse.state, in, 3600.0);
  const auto a = coarse.state.thermal(), b = tr.states.back().thermal(), c = fine.state.thermal();
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(std::abs(a[i] - b[i]), 1e-3);
    EXPECT_LE(std::abs(a[i] - c[i]), 1e-2);
  }

  const std::size_t shift = 24 * 40;
  std::vector<IntervalInput> rotated(in.begin() + shift, in.end());
  rotated.insert(rotated.end(), in.begin(), in.begin() + shift);
  const auto rot = periodic_steady_state(st, guess, rotated, 3600.0, 1e-3);
  const auto tr_fine = simulate(st, fine.state, in, 3600.0);
  const auto phase = tr_fine.states[shift].thermal();
  const auto r = rot.state.thermal();
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(std::abs(r[i] - phase[i]), 1e-2);
  EXPECT_THROW(periodic_steady_state(st, guess, in, 3600.0, 0.0), ConfigError);
  EXPECT_THROW(periodic_steady_state(st, guess, in, 3600.0, 1e-9, 2), ConvergenceError);
}

TEST(Rmsle, Examples) {
  const std::vector<double> a{20, 30, 45}, b{200, 300, 450};
  EXPECT_EQ(rmsle(a, a), 0.0);
  EXPECT_NEAR(rmsle(b, a), 1.0, 1e-15);
  EXPECT_NEAR(rmsle(a, b), rmsle(b, a), 1e-15);
  EXPECT_NEAR(rmsle(std::vector<double>{10, 100}, std::vector<double>{10, 10}), 0.70710678118654752, 1e-15);
  EXPECT_THROW(rmsle(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0}), DomainError);
  EXPECT_THROW(rmsle(std::vector<double>{1.0}, std::vector<double>{1.0, 1.0}), DataError);
}

TEST(DiscretizationStudy, SelfComparisonAndTrend) {
  model::SystemParams sys;
  StudyConfig cfg;
  cfg.n_values = {1, 2, 20};
  cfg.d_values = {1.0, 4.0, 10.0};
  cfg.benchmark_n = 20;
  cfg.benchmark_d = 10.0;
  const auto res = discretization_study(sys, to_vec(year_data().q_load), to_vec(year_data().t_amb), cfg);
  EXPECT_EQ(res.at(2, 2), 0.0);
  EXPECT_GT(res.at(0, 0), res.at(1, 1));
  const auto path = std::filesystem::path(STES_TEST_TMP) / "study.csv";
  write_study_csv(path.string(), res);
  EXPECT_TRUE(std::filesystem::exists(path));
}

TEST(Validation, SelfOffsetAndLayerMismatch) {
  model::SystemParams sys;
  auto in = default_inputs(sys);
  in.resize(500);
  ThermalStepper st(sys.network(), sys.dynamics());
  const auto tr = simulate(st, model::SystemState::uniform(4, 2, 45.0, 13.5), in, 3600.0);
  const auto dir = std::filesystem::path(STES_TEST_TMP);
  std::filesystem::create_directories(dir);
  write_measurements_csv((dir / "meas.csv").string(), tr);
  const auto meas = load_measurements((dir / "meas.csv").string());
  const auto rep = validate_against_measurements(meas, sys);
  for (double e : rep.layer_rmse) EXPECT_NEAR(e, 0.0, 1e-9);

  auto shifted = meas;
  for (auto& row : shifted.layer_temperatures) {
    for (double& v : row) v += 2.0;
  }
  // Keep the initial profile so that the simulation itself is unchanged.
  shifted.layer_temperatures.front() = meas.layer_temperatures.front();
  const auto rep2 = validate_against_measurements(shifted, sys);
  const double n = static_cast<double>(meas.layer_temperatures.size());
  for (double e : rep2.layer_rmse) EXPECT_NEAR(e, 2.0 * std::sqrt((n - 1) / n), 1e-9);

  model::SystemParams three = sys;
  three.geometry.layers = 3;
  try {
    validate_against_measurements(meas, three);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("layer count mismatch"), std::string::npos);
  }
}
