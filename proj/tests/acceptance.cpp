// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epq/canonical2d.hpp"
#include "epq/certificates.hpp"
#include "epq/effective.hpp"
#include "epq/kernels.hpp"
#include "epq/simulate.hpp"
#include "epq/trapping_region.hpp"
#include "fixtures.hpp"

using namespace epq;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.require(secs < budget_s, "runtime budget " + std::to_string(budget_s) + " s");
  if (!out.ok) ++failures;
  std::printf("%s criterion %d: %s (%.2f s)%s\n", out.ok ? "PASS" : "FAIL", id, title, secs,
              out.detail.str().c_str());
  std::fflush(stdout);
}

double lam_max(const QuadraticSystem& sys, const Vec& m) {
  return lambda_max_sym(symmetric_linear_part(sys, m)).value;
}

Vec uniform_in_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized() * radius * std::pow(u(rng), 1.0 / n);
}

}  // namespace

int main() {
  criterion(1, "quartic certificate spectra, derivative identity, N trace", 1.0, [](Outcome& o) {
    const auto [sys, cert] = builtin_counterexample();
    const Vec mv = jacobi_eigen(cert.Mv).values;
    const double expect[] = {0.7339, 55.85, 114.2, 136.3};
    for (int k = 0; k < 4; ++k) {
      o.require(std::abs(mv(k) - expect[k]) <= 1e-3 * expect[k], "Mv eigenvalue " + std::to_string(k + 1));
    }
    std::mt19937_64 rng(2024);
    std::vector<Vec> xs;
    for (int k = 0; k < 10000; ++k) xs.push_back(fx::uniform_vec(rng, 3, -10, 10));
    const double resid = kernels::max_identity_residual_omp(sys, cert, xs);
    o.require(resid <= 1e-8, "derivative identity");
    const Vec ne = jacobi_eigen(cert.N()).values;
    o.require(ne.maxCoeff() < 0.0, "N negative definite");
    o.require(std::abs(ne.sum() - cert.N().trace()) <= 1e-6, "eigenvalue sum = trace");
    o.require(std::abs(cert.N().trace() + 845.3) <= 1e-6, "trace(N) = -845.3");
    o.detail << " mv=(" << mv(0) << ", " << mv(1) << ", " << mv(2) << ", " << mv(3) << ") residual=" << resid
             << " N=(" << ne(0) << ", " << ne(1) << ", " << ne(2) << ", " << ne(3) << ")";
  });

  criterion(2, "counterexample trapping-region optimum", 10.0, [](Outcome& o) {
    const auto sys = fx::counterexample();
    const TrapResult r = solve(sys);
    o.require(std::abs(r.a_star - 0.5) <= 1e-6, "a* = 0.5");
    o.require(r.status == TrapStatus::NoTrappingRegion, "NoTrappingRegion");
    std::vector<double> axis;
    for (int k = -40; k <= 40; ++k) axis.push_back(0.25 * k);
    const auto grid = kernels::lambda_max_grid_omp(sys, axis);
    o.require(grid.value >= 0.5 - 1e-3, "grid oracle");
    o.detail << " a*=" << r.a_star << " grid_min=" << grid.value;
  });

  criterion(3, "counterexample effective nonlinearity", 1.0, [](Outcome& o) {
    const auto sys = fx::counterexample();
    const auto cands = generate_candidates(sys);
    const std::vector<std::vector<int>> axes{{0}, {1}, {2}, {0, 1}};
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const Subspace v = Subspace::coordinate(3, axes[i]);
      bool found = false;
      for (const auto& c : cands) found = found || c.same_as(v, 1e-8);
      o.require(found, "V" + std::to_string(i + 1) + " generated");
      const CandidateCheck chk = check_candidate(sys, v);
      o.require(chk.phi_vanishes, "V" + std::to_string(i + 1) + " condition 1");
      o.require(!chk.invariant, "V" + std::to_string(i + 1) + " fails condition 2");
    }
    const CandidateCheck v1 = check_candidate(sys, Subspace::coordinate(3, {0}));
    const CandidateCheck v4 = check_candidate(sys, Subspace::coordinate(3, {0, 1}));
    o.require((v1.escaping_image - fx::vec({-2, -1, 0})).norm() == 0.0, "L e1 = (-2,-1,0)");
    o.require((v4.escaping_image - fx::vec({1, 0.5, -3})).norm() == 0.0, "L e2 = (1,0.5,-3)");
    const auto verdict = check_effective(sys);
    o.require(verdict.result == Effectiveness::Effective, "verdict Effective");
    o.detail << " candidates=" << cands.size() << " verdict=" << to_string(verdict.result);
  });

  criterion(4, "counterexample trajectories converge with exponential V decay", 10.0, [](Outcome& o) {
    const auto [sys, cert] = builtin_counterexample();
    std::mt19937_64 rng(4);
    IntegrateOptions opts;
    opts.t_final = 50.0;
    opts.rtol = 1e-10;
    opts.atol = 1e-300;
    opts.norm_relative_error = true;
    opts.recording = Recording::Sampled;
    opts.output_dt = 0.05;
    double worst_final = 0.0, worst_ratio = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Vec x0 = uniform_in_ball(rng, 3, 10.0);
      const auto traj = integrate(sys, x0, opts);
      o.require(traj.status == TrajectoryStatus::Completed, "trajectory completed");
      worst_final = std::max(worst_final, traj.states.back().norm());
      double prev = lyapunov_value(cert, x0);
      for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const double w = lyapunov_value(cert, traj.states[i]) * std::exp(cert.alpha * traj.times[i]);
        worst_ratio = std::max(worst_ratio, w / prev);
        prev = w;
      }
    }
    o.require(worst_final < 1e-3, "|x(50)| < 1e-3");
    o.require(worst_ratio <= 1 + 1e-6, "V e^{0.1 t} non-increasing");
    o.detail << " max|x(50)|=" << worst_final << " max step ratio=" << worst_ratio;
  });

  criterion(5, "Lorenz positive control", 30.0, [](Outcome& o) {
    const auto sys = fx::lorenz();
    o.require(std::abs(lam_max(sys, fx::vec({0, 0, 38})) + 1.0) <= 1e-12, "oracle shift value");
    const TrapResult r = solve(sys);
    o.require(r.a_star <= -1 + 1e-6, "a* <= -1");
    o.require(verdict_of(r, 1e-8) == TrapVerdict::BoundedCertified, "BoundedCertified");
    ProbeOptions popts;
    popts.trials = 20;
    const auto probe = probe_boundedness(sys, popts);
    o.require(probe.verdict == ProbeVerdict::AllConverged, "probe AllConverged");
    o.detail << " a*=" << r.a_star << " probe=" << to_string(probe.verdict) << " beta=" << probe.beta_est;
  });

  criterion(6, "2D necessity: shift witnesses and escape certificates", 60.0, [](Outcome& o) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> entry(-2.0, 2.0), mag(0.25, 2.0), qd(0.5, 2.0);
    std::bernoulli_distribution sign(0.5);
    int feasible = 0, escaping = 0;
    double worst_witness = -1e300;
    for (int k = 0; k < 200; ++k) {
      Eigen::Matrix2d l;
      l << entry(rng), entry(rng), entry(rng), (sign(rng) ? 1.0 : -1.0) * mag(rng);
      const Canonical2D cf = make_canonical(Eigen::Vector2d(entry(rng), entry(rng)), l, qd(rng));
      const TwoDVerdict v = classify_2d(cf.system());
      if (cf.l22 <= 0) {
        ++feasible;
        const bool ok = v.witness_m.has_value();
        o.require(ok, "witness present");
        if (!ok) continue;
        const double lm = lam_max(cf.system(), Vec(*v.witness_m));
        worst_witness = std::max(worst_witness, lm);
        o.require(lm <= 1e-10, "lambda_max(A_s(m)) <= 0");
      } else {
        ++escaping;
        const bool ok = v.escape_x0.has_value();
        o.require(ok, "escape point present");
        if (!ok) continue;
        const Vec x0 = *v.escape_x0;
        IntegrateOptions opts;
        opts.t_final = 1e3;
        opts.recording = Recording::Endpoints;
        bool drift = true;
        const auto traj = integrate(cf.system(), x0, opts, [&](double t, const Vec& x) {
          if (x(1) > x0(1) - t + 1e-9 * (1 + std::abs(x(1)))) drift = false;
          return true;
        });
        o.require(drift, "x2(t) <= x2(0) - t");
        o.require(traj.status == TrajectoryStatus::Diverged, "Diverged status");
      }
    }
    o.detail << " feasible=" << feasible << " escaping=" << escaping << " worst witness=" << worst_witness;
  });

  criterion(7, "rotation invariance of a* in 2D", 60.0, [](Outcome& o) {
    std::uniform_real_distribution<double> ang(0.0, 2 * 3.141592653589793);
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const auto sys = random_system(2, 7000 + k, 1.0);
      const auto rot = rotate(sys, fx::rotation2(ang(rng)));
      worst = std::max(worst, std::abs(solve(sys).a_star - solve(rot).a_star));
    }
    o.require(worst <= 1e-6, "|a* - a*_rot| <= 1e-6");
    o.detail << " worst=" << worst;
  });

  criterion(8, "structural identities", 60.0, [](Outcome& o) {
    std::mt19937_64 rng(8);
    double worst_ep = 0.0, worst_dot = 0.0, worst_rate = 0.0;
    std::vector<QuadraticSystem> systems;
    for (int k = 0; k < 100; ++k) systems.push_back(random_system(2 + k % 5, 8000 + k, 2.0));
    for (const auto& s : systems) worst_ep = std::max(worst_ep, energy_preserving_residual(s.Qs()).value);
    for (int k = 0; k < 100; ++k) {
      std::vector<Vec> xs;
      for (int j = 0; j < 1000; ++j) xs.push_back(fx::uniform_vec(rng, systems[k].n(), -10, 10));
      worst_dot = std::max(worst_dot, kernels::max_energy_product_omp(systems[k], xs));
    }
    IntegrateOptions opts;
    opts.t_final = 2.0;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    opts.recording = Recording::Sampled;
    opts.output_dt = 5e-4;
    for (int k = 0; k < 20; ++k) {
      const int n = 2 + k % 3;
      const auto sys = random_system(n, 8500 + k, 0.5);
      const Vec m = fx::uniform_vec(rng, n, -2, 2);
      const auto traj = integrate(sys, fx::uniform_vec(rng, n, -1, 1), opts);
      worst_rate = std::max(worst_rate, energy_rate_check(sys, m, traj));
    }
    o.require(worst_ep <= 1e-12, "energy-preserving residual");
    o.require(worst_dot <= 1e-10, "x . phi(x) = 0");
    o.require(worst_rate <= 1e-4, "energy rate along trajectories");
    o.detail << " eq_resid=" << worst_ep << " dot=" << worst_dot << " rate=" << worst_rate;
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
