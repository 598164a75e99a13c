#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epq/linalg.hpp"
#include "epq/system.hpp"

namespace epq {

enum class TrapMethod { Both, Barrier, Subgradient };
const char* to_string(TrapMethod m);

struct SolverOptions {
  double tol = 1e-8;           ///< outer tolerance on a*
  double newton_tol = 1e-10;   ///< Newton decrement / gradient tolerance
  int max_bisection = 200;
  int max_newton = 500;        ///< per inner feasibility solve
  int restarts = 8;            ///< subgradient starts (first is m = 0)
  int max_subgradient = 4000;  ///< iterations per restart
  double disagreement_warn = 1e-5;
  /// Shifts are confined to |m| <= ball_radius; 0 picks 1e3 |L| / |Q|.
  double ball_radius = 0.0;
  TrapMethod method = TrapMethod::Both;
  std::uint64_t seed = 7;
  bool parallel_restarts = true;
};

enum class TrapStatus { BoundedCertified, NoTrappingRegion };
enum class TrapVerdict { BoundedCertified, NoTrappingRegion, Marginal };
const char* to_string(TrapStatus s);
const char* to_string(TrapVerdict v);

struct SolverInfo {
  int bisection_steps = 0;
  int newton_steps = 0;
  int subgradient_iterations = 0;
  double lower_bound = 0.0;   ///< certified (within the shift ball) lower bound on a*
  double final_gap = 0.0;     ///< a_star - lower_bound
  double barrier_value = 0.0;
  double subgradient_value = 0.0;
  std::string method_used;
  bool marginal = false;      ///< |a*| <= tol
  bool shift_at_ball = false;
  std::vector<std::string> warnings;
};

struct TrapResult {
  double a_star = 0.0;
  Vec m_star;
  TrapStatus status = TrapStatus::NoTrappingRegion;
  SolverInfo info;
};

/// min over m of lambda_max(A_s(m)). Throws Error(MaxIterations) when the
/// bisection bracket is still wider than 100 * tol after max_bisection steps.
TrapResult solve(const QuadraticSystem& sys, const SolverOptions& opts = {});

/// A shift with lambda_max(A_s(m)) < a, if the barrier phase-I solve finds one.
/// Absence is a solver outcome; the infeasibility certificate is solve's a* > a.
std::optional<Vec> feasibility_at(const QuadraticSystem& sys, double a,
                                  const SolverOptions& opts = {});

TrapVerdict verdict(const QuadraticSystem& sys, const SolverOptions& opts = {});
TrapVerdict verdict_of(const TrapResult& r, double tol);

/// lambda_max(A_s(m)) and the spectral subgradient -u^T Q(i) u.
struct SpectralValue {
  double value = 0.0;
  Vec subgradient;
  double gap = 0.0;
};
SpectralValue spectral_value(const QuadraticSystem& sys, const Vec& m);

}  // namespace epq
