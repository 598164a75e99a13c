#include "epq/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "epq/errors.hpp"
#include "epq/kernels.hpp"

namespace epq {

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return "Completed";
    case TrajectoryStatus::Diverged: return "Diverged";
    case TrajectoryStatus::StepFailure: return "StepFailure";
  }
  return "?";
}

const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::AllConverged: return "AllConverged";
    case ProbeVerdict::DivergenceFound: return "DivergenceFound";
    case ProbeVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output (Hairer's dopri5 continuous extension).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

class Rhs {
 public:
  explicit Rhs(const QuadraticSystem& sys) : sys_(sys) {}
  void operator()(const Vec& x, Vec& out) const {
    out.noalias() = sys_.L() * x;
    out += sys_.c();
    for (int i = 0; i < sys_.n(); ++i) out(i) += x.dot(sys_.Q(i) * x);
  }

 private:
  const QuadraticSystem& sys_;
};

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const IntegrateOptions& o) {
  const Eigen::Index n = err.size();
  double sum = 0.0;
  if (o.norm_relative_error) {
    const double scale =
        o.atol + o.rtol * std::max(y0.cwiseAbs().maxCoeff(), y1.cwiseAbs().maxCoeff());
    return std::sqrt(err.squaredNorm() / static_cast<double>(n)) / scale;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double initial_step(const Rhs& f, const Vec& x0, const Vec& f0, const IntegrateOptions& o) {
  const Eigen::Index n = x0.size();
  auto scaled = [&](const Vec& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = o.atol + o.rtol * std::abs(x0(i));
      s += (v(i) / sc) * (v(i) / sc);
    }
    return std::sqrt(s / static_cast<double>(n));
  };
  const double dnf = scaled(f0);
  const double dny = scaled(x0);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, o.t_final);
  Vec x1 = x0 + h * f0;
  Vec f1(n);
  f(x1, f1);
  const double der2 = scaled(f1 - f0) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                   : std::pow(0.01 / der12, 1.0 / 5.0);
  return std::min({100.0 * h, h1, o.t_final, o.max_step});
}

}  // namespace

Trajectory integrate(const QuadraticSystem& sys, const Vec& x0, const IntegrateOptions& o,
                     const StepObserver& observer) {
  if (x0.size() != sys.n()) {
    std::ostringstream msg;
    msg << "integrate: x0 has length " << x0.size() << ", expected " << sys.n();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  const Eigen::Index n = sys.n();
  const Rhs f(sys);
  Trajectory traj;

  auto record = [&](double t, const Vec& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
  };

  Vec y = x0;
  double t = 0.0;
  record(t, y);
  if (!(o.t_final > 0.0)) return traj;

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  f(y, k1);

  const bool adaptive = !(o.fixed_step > 0.0);
  double h = adaptive ? (o.h0 > 0.0 ? o.h0 : initial_step(f, y, k1, o)) : o.fixed_step;
  h = std::min(h, o.max_step);

  constexpr double kSafe = 0.9, kBeta = 0.04, kFacMin = 0.2, kFacMax = 10.0;
  const double expo1 = 0.2 - kBeta * 0.75;
  double facold = 1e-4;
  bool last_rejected = false;
  double next_sample = o.output_dt;
  long steps = 0;

  while (t < o.t_final) {
    if (++steps > o.max_steps) {
      traj.status = TrajectoryStatus::StepFailure;
      traj.message = "maximum number of steps reached";
      break;
    }
    bool final_step = false;
    if (t + h >= o.t_final || (t + 1.01 * h >= o.t_final)) {
      h = o.t_final - t;
      final_step = true;
    }
    if (adaptive && h < o.min_step * std::max(1.0, std::abs(t))) {
      traj.status = TrajectoryStatus::StepFailure;
      std::ostringstream msg;
      msg << "step size " << h << " underflow at t = " << t;
      traj.message = msg.str();
      break;
    }

    ytmp = y + h * a21 * k1;
    f(ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(y1, k7);

    double e = 0.0;
    if (adaptive) {
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      e = error_norm(err, y, y1, o);
      if (!std::isfinite(e) || !y1.allFinite()) e = 1e10;
    }

    if (e <= 1.0) {
      const double t_new = final_step ? o.t_final : t + h;
      if (o.recording == Recording::Sampled && o.output_dt > 0.0) {
        const Vec r1 = y;
        const Vec r2 = y1 - y;
        const Vec r3 = h * k1 - r2;
        const Vec r4 = r2 - h * k7 - r3;
        const Vec r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_sample < t_new - 1e-12 * std::max(1.0, t_new)) {
          const double th = (next_sample - t) / h;
          const double th1 = 1.0 - th;
          record(next_sample, r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5))));
          next_sample += o.output_dt;
        }
      }
      t = t_new;
      y = y1;
      k1 = k7;
      ++traj.accepted;
      const bool sample_here = o.recording == Recording::EveryStep ||
                               (o.recording == Recording::Sampled &&
                                std::abs(t - next_sample) <= 1e-12 * std::max(1.0, t));
      if (sample_here) {
        record(t, y);
        if (o.recording == Recording::Sampled) next_sample += o.output_dt;
      }

      if (y.norm() > o.divergence_threshold) {
        traj.status = TrajectoryStatus::Diverged;
        traj.diverged_at = t;
        if (traj.times.back() != t) record(t, y);
        break;
      }
      if (observer && !observer(t, y)) {
        if (traj.times.back() != t) record(t, y);
        break;
      }
      if (final_step) {
        if (traj.times.back() != t) record(t, y);
        break;
      }
      if (adaptive) {
        const double fac11 = std::pow(e, expo1);
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
        double h_new = h / fac;
        facold = std::max(e, 1e-4);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        h = std::min(h_new, o.max_step);
      }
    } else {
      ++traj.rejected;
      last_rejected = true;
      const double fac11 = std::pow(std::min(e, 1e10), expo1);
      h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
    }
  }
  return traj;
}

std::vector<Vec> probe_initial_conditions(int n, const ProbeOptions& opts) {
  std::vector<Vec> out;
  if (opts.axis_points) {
    for (int i = 0; i < n; ++i)
      for (double sign : {1.0, -1.0}) {
        Vec v = Vec::Zero(n);
        v(i) = sign * opts.radius;
        out.push_back(v);
      }
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < opts.trials; ++k) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    const double r = opts.radius * std::pow(uni(rng), 1.0 / n);
    out.push_back(v.normalized() * r);
  }
  return out;
}

TrialSummary run_trial(const QuadraticSystem& sys, const Vec& x0, const IntegrateOptions& opts) {
  TrialSummary s;
  s.x0 = x0;
  IntegrateOptions o = opts;
  o.recording = Recording::Endpoints;
  s.times.push_back(0.0);
  s.norms.push_back(x0.norm());
  const Trajectory traj = integrate(sys, x0, o, [&](double t, const Vec& x) {
    s.times.push_back(t);
    s.norms.push_back(x.norm());
    return true;
  });
  s.status = traj.status;
  const double horizon = opts.t_final;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i];
    const double v = s.norms[i];
    if (t >= 0.8 * horizon) s.window_sup = std::max(s.window_sup, v);
    if (t >= 0.9 * horizon) {
      s.late_sup = std::max(s.late_sup, v);
    } else if (t >= 0.8 * horizon) {
      s.prior_sup = std::max(s.prior_sup, v);
    }
  }
  return s;
}

BoundednessProbe probe_boundedness(const QuadraticSystem& sys, const ProbeOptions& opts) {
  if (opts.trials < 1) throw Error(ErrorCode::InvalidDimension, "probe: trials must be >= 1");
  const std::vector<Vec> x0s = probe_initial_conditions(sys.n(), opts);
  const std::vector<TrialSummary> runs = opts.parallel
                                             ? kernels::run_trials_omp(sys, x0s, opts.integrate)
                                             : kernels::run_trials_serial(sys, x0s, opts.integrate);
  BoundednessProbe probe;
  probe.trials = static_cast<int>(runs.size());

  for (const TrialSummary& r : runs) {
    if (r.status == TrajectoryStatus::Diverged) {
      probe.verdict = ProbeVerdict::DivergenceFound;
      probe.divergent_x0 = r.x0;
      probe.note = "trajectory exceeded the divergence threshold";
      return probe;
    }
  }
  for (const TrialSummary& r : runs) {
    if (r.status == TrajectoryStatus::StepFailure) {
      probe.verdict = ProbeVerdict::Inconclusive;
      probe.note = "integrator step failure";
      return probe;
    }
  }

  double beta = 0.0;
  bool settled = true;
  for (const TrialSummary& r : runs) {
    beta = std::max(beta, r.window_sup);
    const double floor = 1e-9 * std::max(1.0, opts.radius);
    if (r.late_sup > opts.settle_growth * r.prior_sup + floor) settled = false;
  }
  probe.beta_est = beta;
  double t_est = 0.0;
  for (const TrialSummary& r : runs) {
    for (std::size_t i = r.times.size(); i-- > 0;) {
      if (r.norms[i] > beta) {
        t_est = std::max(t_est, r.times[i]);
        break;
      }
    }
  }
  probe.T_est = t_est;
  if (settled) {
    probe.verdict = ProbeVerdict::AllConverged;
    probe.note = "empirical: every trajectory settled below beta_est within the horizon";
  } else {
    probe.verdict = ProbeVerdict::Inconclusive;
    probe.note = "sup-norm still growing at the end of the horizon";
  }
  return probe;
}

double energy_rate_check(const QuadraticSystem& sys, const Vec& m, const Trajectory& traj) {
  if (m.size() != sys.n()) {
    throw Error(ErrorCode::DimensionMismatch, "energy_rate_check: shift has wrong length");
  }
  for (const Vec& x : traj.states) {
    if (x.size() != sys.n()) {
      throw Error(ErrorCode::DimensionMismatch, "energy_rate_check: trajectory state length");
    }
  }
  const ShiftedSystem sh = shift(sys, m);
  const std::size_t count = traj.times.size();
  double worst = 0.0;
  auto energy = [&](std::size_t i) { return (traj.states[i] - m).squaredNorm(); };
  for (std::size_t i = 1; i + 1 < count; ++i) {
    const double h1 = traj.times[i] - traj.times[i - 1];
    const double h2 = traj.times[i + 1] - traj.times[i];
    if (!(h1 > 0.0) || !(h2 > 0.0)) continue;
    const double fd = -h2 / (h1 * (h1 + h2)) * energy(i - 1) + (h2 - h1) / (h1 * h2) * energy(i) +
                      h1 / (h2 * (h1 + h2)) * energy(i + 1);
    const double rate = energy_rate(sh, traj.states[i] - m);
    worst = std::max(worst, std::abs(fd - rate) / std::max(1.0, std::abs(rate)));
  }
  return worst;
}

}  // namespace epq
