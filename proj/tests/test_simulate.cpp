#include <doctest.h>

#include <cmath>
#include <random>

#include "epq/certificates.hpp"
#include "epq/simulate.hpp"
#include "epq/trapping_region.hpp"
#include "fixtures.hpp"

using namespace epq;

TEST_CASE("linear decay matches the closed form") {
  const auto sys = fx::linear(-Mat::Identity(2, 2));
  IntegrateOptions opts;
  opts.t_final = 1.0;
  const auto traj = integrate(sys, fx::vec({1, 1}), opts);
  CHECK(traj.status == TrajectoryStatus::Completed);
  CHECK(traj.times.back() == 1.0);
  CHECK((traj.states.back() - std::exp(-1.0) * fx::vec({1, 1})).norm() <= 1e-7);
  for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
  CHECK(traj.times.size() == traj.states.size());
}

TEST_CASE("fixed-step convergence order is five") {
  const auto sys = fx::linear(-Mat::Identity(1, 1));
  auto err = [&](double h) {
    IntegrateOptions opts;
    opts.t_final = 1.0;
    opts.fixed_step = h;
    opts.recording = Recording::Endpoints;
    return std::abs(integrate(sys, fx::vec({1}), opts).states.back()(0) - std::exp(-1.0));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio > 32.0 / 1.5);
  CHECK(ratio < 32.0 * 1.5);
}

TEST_CASE("tolerance halving scales the error like a fifth-order method") {
  Mat l(2, 2);
  l << -0.1, 1, -1, -0.1;
  const auto sys = fx::linear(l);
  const Vec x0 = fx::vec({1, 0});
  auto err = [&](double tol) {
    IntegrateOptions opts;
    opts.t_final = 10.0;
    opts.rtol = tol;
    opts.atol = tol;
    opts.recording = Recording::Endpoints;
    const Vec exact = std::exp(-1.0) * fx::vec({std::cos(10.0), -std::sin(10.0)});
    return (integrate(sys, x0, opts).states.back() - exact).norm();
  };
  // error ~ tol^(5/6) for a 5th-order pair with 4th-order error control
  const double expected = std::pow(2.0, 5.0 / 6.0);
  for (double tol : {1e-6, 1e-7, 1e-8}) {
    const double ratio = err(tol) / err(tol / 2);
    CHECK(ratio > expected / 4);
    CHECK(ratio < expected * 4);
  }
}

TEST_CASE("sampled recording hits the grid") {
  const auto sys = fx::counterexample();
  IntegrateOptions opts;
  opts.t_final = 2.0;
  opts.recording = Recording::Sampled;
  opts.output_dt = 0.25;
  const auto traj = integrate(sys, fx::vec({1, 1, 1}), opts);
  REQUIRE(traj.times.size() == 9);
  for (std::size_t k = 0; k < traj.times.size(); ++k) CHECK(traj.times[k] == doctest::Approx(0.25 * k));
  IntegrateOptions dense = opts;
  dense.recording = Recording::EveryStep;
  dense.rtol = 1e-12;
  dense.atol = 1e-14;
  dense.t_final = 1.0;
  const auto ref = integrate(sys, fx::vec({1, 1, 1}), dense);
  CHECK((ref.states.back() - traj.states[4]).norm() <= 1e-6);
}

TEST_CASE("counterexample trajectory from (1,1,1) decays") {
  const auto sys = fx::counterexample();
  IntegrateOptions opts;
  opts.t_final = 10.0;
  opts.recording = Recording::Sampled;
  opts.output_dt = 0.05;
  const auto traj = integrate(sys, fx::vec({1, 1, 1}), opts);
  CHECK(traj.states.back().norm() < 1e-3);
  // L has a complex pair, so |x| wobbles; its sup over unit windows decreases
  std::vector<double> window_sup(10, 0.0);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto w = std::min<std::size_t>(9, static_cast<std::size_t>(traj.times[k]));
    window_sup[w] = std::max(window_sup[w], traj.states[k].norm());
  }
  for (std::size_t w = 2; w < window_sup.size(); ++w) CHECK(window_sup[w] < window_sup[w - 1]);
}

TEST_CASE("divergence and step failure are statuses") {
  Mat a(2, 2), b(2, 2);
  a << 0, 0.5, 0.5, 0;
  b << -1, 0, 0, 0;
  Mat l(2, 2);
  l << 0, 0, 0, 1;
  const auto sys = QuadraticSystem::create(Vec::Zero(2), l, {a, b});
  const auto traj = integrate(sys, fx::vec({0, -2}), {});
  CHECK(traj.status == TrajectoryStatus::Diverged);
  CHECK(traj.states.back().norm() > 1e6);
  CHECK(traj.diverged_at > 0);

  IntegrateOptions tiny;
  tiny.max_step = 1e-15;
  const auto fail = integrate(fx::counterexample(), fx::vec({1, 1, 1}), tiny);
  CHECK(fail.status == TrajectoryStatus::StepFailure);
}

TEST_CASE("integration is deterministic") {
  const auto sys = random_system(4, 3);
  const auto a = integrate(sys, fx::vec({0.1, 0.2, -0.3, 0.4}), {});
  const auto b = integrate(sys, fx::vec({0.1, 0.2, -0.3, 0.4}), {});
  REQUIRE(a.times.size() == b.times.size());
  CHECK(a.times == b.times);
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);
}

TEST_CASE("initial conditions include axis points") {
  ProbeOptions opts;
  opts.trials = 5;
  opts.radius = 3.0;
  const auto pts = probe_initial_conditions(3, opts);
  REQUIRE(pts.size() == 11);
  CHECK((pts[0] - fx::vec({3, 0, 0})).norm() == 0.0);
  CHECK((pts[1] - fx::vec({-3, 0, 0})).norm() == 0.0);
  for (const Vec& p : pts) CHECK(p.norm() <= 3.0 + 1e-12);
  CHECK(probe_initial_conditions(3, opts) == pts);
}

TEST_CASE("probe verdicts") {
  SUBCASE("counterexample converges") {
    const auto p = probe_boundedness(fx::counterexample());
    CHECK(p.verdict == ProbeVerdict::AllConverged);
    CHECK(p.beta_est < 1e-3);
  }
  SUBCASE("Lorenz stays bounded on its attractor") {
    const auto p = probe_boundedness(fx::lorenz());
    CHECK(p.verdict == ProbeVerdict::AllConverged);
    CHECK(p.beta_est > 1.0);
    CHECK(std::isfinite(p.beta_est));
  }
  SUBCASE("escaping 2D system") {
    Mat a(2, 2), b(2, 2);
    a << 0, 0.5, 0.5, 0;
    b << -1, 0, 0, 0;
    Mat l(2, 2);
    l << -1, 0, 0, 1;
    const auto sys = QuadraticSystem::create(Vec::Zero(2), l, {a, b});
    const auto p = probe_boundedness(sys);
    CHECK(p.verdict == ProbeVerdict::DivergenceFound);
    REQUIRE(p.divergent_x0);
    CHECK(integrate(sys, *p.divergent_x0, {}).status == TrajectoryStatus::Diverged);
  }
}

TEST_CASE("serial and parallel probes agree") {
  ProbeOptions par;
  par.trials = 6;
  ProbeOptions ser = par;
  ser.parallel = false;
  const auto a = probe_boundedness(fx::lorenz(), par);
  const auto b = probe_boundedness(fx::lorenz(), ser);
  CHECK(a.verdict == b.verdict);
  CHECK(a.beta_est == b.beta_est);
  CHECK(a.T_est == b.T_est);
}

TEST_CASE("BoundedCertified systems never diverge in the probe") {
  int certified = 0;
  for (int s = 0; s < 30 && certified < 4; ++s) {
    const auto sys = random_system(3, 5000 + s);
    if (solve(sys).status != TrapStatus::BoundedCertified) continue;
    ++certified;
    ProbeOptions opts;
    opts.radius = 100.0;
    opts.integrate.t_final = 30.0;
    CHECK(probe_boundedness(sys, opts).verdict != ProbeVerdict::DivergenceFound);
  }
  CHECK(certified > 0);
}

TEST_CASE("energy rate identity along trajectories") {
  IntegrateOptions opts;
  opts.t_final = 5.0;
  opts.rtol = 1e-12;
  opts.atol = 1e-14;
  opts.recording = Recording::Sampled;
  opts.output_dt = 5e-4;

  const auto cx = fx::counterexample();
  CHECK(energy_rate_check(cx, Vec::Zero(3), integrate(cx, fx::vec({1, 1, 1}), opts)) <= 1e-5);

  Mat l(2, 2);
  l << -0.3, 1, -1, -0.2;
  const auto lin = fx::linear(l, fx::vec({0.1, 0.2}));
  CHECK(energy_rate_check(lin, fx::vec({0.5, -1}), integrate(lin, fx::vec({1, 0}), opts)) <= 1e-5);

  std::mt19937_64 rng(12);
  for (int s = 0; s < 5; ++s) {
    const auto sys = random_system(3, 2000 + s, 0.5);
    const Vec m = fx::uniform_vec(rng, 3, -2, 2);
    IntegrateOptions o = opts;
    o.t_final = 2.0;
    const auto traj = integrate(sys, fx::uniform_vec(rng, 3, -1, 1), o);
    CHECK(energy_rate_check(sys, m, traj) <= 1e-4);
  }
  CHECK_THROWS(energy_rate_check(cx, Vec::Zero(2), integrate(cx, fx::vec({1, 1, 1}), opts)));
}
