#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "epq/linalg.hpp"
#include "epq/system.hpp"

namespace epq {

enum class TrajectoryStatus { Completed, Diverged, StepFailure };
const char* to_string(TrajectoryStatus s);

enum class Recording {
  EveryStep,  ///< every accepted step
  Sampled,    ///< dense output on a uniform grid of spacing output_dt
  Endpoints,  ///< x0 and the final state only
};

struct IntegrateOptions {
  double t_final = 50.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Scale the error of every component by max-norm of the state instead of
  /// the component itself (pure relative control for decaying solutions).
  bool norm_relative_error = false;
  /// Initial step; 0 picks one from the local derivative scale.
  double h0 = 0.0;
  double max_step = std::numeric_limits<double>::infinity();
  /// Positive value disables step control and takes fixed steps of this size.
  double fixed_step = 0.0;
  Recording recording = Recording::EveryStep;
  double output_dt = 0.01;
  double divergence_threshold = 1e6;
  double min_step = 1e-14;
  long max_steps = 50'000'000;
};

/// Called after every accepted step; returning false stops the integration
/// with status Completed at that time.
using StepObserver = std::function<bool(double t, const Vec& x)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  double diverged_at = std::numeric_limits<double>::quiet_NaN();
  long accepted = 0;
  long rejected = 0;
  std::string message;
};

/// Dormand-Prince 5(4) with PI step-size control and the 4th-order dense
/// output used for Recording::Sampled.
Trajectory integrate(const QuadraticSystem& sys, const Vec& x0, const IntegrateOptions& opts = {},
                     const StepObserver& observer = {});

enum class ProbeVerdict { AllConverged, DivergenceFound, Inconclusive };
const char* to_string(ProbeVerdict v);

struct ProbeOptions {
  int trials = 20;
  double radius = 10.0;
  std::uint64_t seed = 1;
  bool axis_points = true;
  /// A trajectory counts as settled when the sup-norm over the last 10% of the
  /// horizon is at most settle_growth times the sup-norm over the 10% before.
  double settle_growth = 1.5;
  bool parallel = true;
  IntegrateOptions integrate{};
};

struct TrialSummary {
  Vec x0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  double window_sup = 0.0;  ///< sup |x| over the final 20% of the horizon
  double late_sup = 0.0;    ///< last 10%
  double prior_sup = 0.0;   ///< the 10% before that
  std::vector<double> times;
  std::vector<double> norms;
};

/// Empirical estimate of ultimate boundedness. Never a proof: beta_est and
/// T_est are finite-horizon observations.
struct BoundednessProbe {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  double beta_est = 0.0;
  double T_est = 0.0;
  std::optional<Vec> divergent_x0;
  int trials = 0;
  std::string note;
};

/// Axis points (+-radius e_i) first, then `trials` points uniform in the ball.
std::vector<Vec> probe_initial_conditions(int n, const ProbeOptions& opts);

TrialSummary run_trial(const QuadraticSystem& sys, const Vec& x0, const IntegrateOptions& opts);

BoundednessProbe probe_boundedness(const QuadraticSystem& sys, const ProbeOptions& opts = {});

/// Max over interior samples of |FD(K) - energy_rate| / max(1, |energy_rate|)
/// with K(t) = |x(t) - m|^2 and a three-point nonuniform difference.
double energy_rate_check(const QuadraticSystem& sys, const Vec& m, const Trajectory& traj);

}  // namespace epq
