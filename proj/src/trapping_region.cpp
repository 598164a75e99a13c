#include "epq/trapping_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "epq/errors.hpp"

namespace epq {

const char* to_string(TrapMethod m) {
  switch (m) {
    case TrapMethod::Both: return "both";
    case TrapMethod::Barrier: return "barrier";
    case TrapMethod::Subgradient: return "subgradient";
  }
  return "?";
}

const char* to_string(TrapStatus s) {
  return s == TrapStatus::BoundedCertified ? "BoundedCertified" : "NoTrappingRegion";
}

const char* to_string(TrapVerdict v) {
  switch (v) {
    case TrapVerdict::BoundedCertified: return "BoundedCertified";
    case TrapVerdict::NoTrappingRegion: return "NoTrappingRegion";
    case TrapVerdict::Marginal: return "Marginal";
  }
  return "?";
}

SpectralValue spectral_value(const QuadraticSystem& sys, const Vec& m) {
  const TopEigen top = lambda_max_sym(symmetric_linear_part(sys, m));
  SpectralValue out;
  out.value = top.value;
  out.gap = top.gap;
  out.subgradient.resize(sys.n());
  for (int i = 0; i < sys.n(); ++i) out.subgradient(i) = -top.vector.dot(sys.Q(i) * top.vector);
  return out;
}

namespace {

// The LMI family  A_s(m) = Ls - sum_i m_i Q(i)  restricted to |m| <= radius.
struct Lmi {
  int n = 0;
  Mat ls;
  std::vector<Mat> q;
  double radius = 1.0;
  double scale = 1.0;

  Mat a_s(const Vec& m) const {
    Mat out = ls;
    for (int i = 0; i < n; ++i) out -= m(i) * q[i];
    return out;
  }
};

Lmi make_lmi(const QuadraticSystem& sys, const SolverOptions& opts) {
  Lmi p;
  p.n = sys.n();
  p.ls = sys.L_sym();
  p.q = sys.Qs();
  const SymEigen eig = jacobi_eigen(p.ls);
  p.scale = std::max({1.0, std::abs(eig.values(0)), std::abs(eig.values(p.n - 1))});
  const double qn = sys.q_norm();
  if (opts.ball_radius > 0.0) {
    p.radius = opts.ball_radius;
  } else if (qn > 1e-14 * p.scale) {
    p.radius = std::min(1e8, 1e3 * std::max(1.0, sys.L().norm()) / qn);
  } else {
    p.radius = 1.0;
  }
  return p;
}

struct InnerResult {
  enum class Kind { Feasible, Infeasible, Undecided };
  Kind kind = Kind::Undecided;
  Vec m_best;
  double value_best = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  int newton = 0;
  bool budget_exhausted = false;
};

// Phase-I barrier for level `level`:
//   minimize s  s.t.  A_s(m) <= (level + s) I,  |m| <= radius
// by the path-following method on  t s - logdet(S) - log(radius^2 - |m|^2),
// S = (level + s) I - A_s(m). Returns as soon as s < 0 (feasible) or the
// duality-gap bound proves s* > 0 (infeasible).
InnerResult solve_level(const Lmi& p, double level, const Vec& warm, const SolverOptions& opts) {
  const int n = p.n;
  const int nv = n + 1;  // (m, s)
  const double r2 = p.radius * p.radius;
  const double degree = n + 1.0;

  InnerResult res;
  Vec m = warm;
  if (m.norm() >= 0.9 * p.radius) m *= 0.5 * p.radius / m.norm();

  auto track = [&](const Vec& mm) {
    const double v = lambda_max_sym(p.a_s(mm)).value;
    if (v < res.value_best) {
      res.value_best = v;
      res.m_best = mm;
    }
    return v;
  };
  const double top = track(m);
  if (top < level) {
    res.kind = InnerResult::Kind::Feasible;
    return res;
  }

  double s = top - level + 0.1 * p.scale;
  double t = 1.0 / p.scale;
  const Mat eye = Mat::Identity(n, n);

  auto slack = [&](const Vec& mm, double ss) { return Mat((level + ss) * eye - p.a_s(mm)); };
  auto objective = [&](const Vec& mm, double ss, bool& ok) {
    ok = false;
    const double g = r2 - mm.squaredNorm();
    if (!(g > 0.0)) return 0.0;
    Eigen::LLT<Mat> llt(slack(mm, ss));
    if (llt.info() != Eigen::Success) return 0.0;
    double logdet = 0.0;
    const Mat& lmat = llt.matrixLLT();
    for (int i = 0; i < n; ++i) {
      if (!(lmat(i, i) > 0.0)) return 0.0;
      logdet += 2.0 * std::log(lmat(i, i));
    }
    ok = true;
    return t * ss - logdet - std::log(g);
  };

  std::vector<Mat> g_mats(static_cast<std::size_t>(nv));
  double last_decrement = 0.0;
  for (int outer = 0; outer < 200; ++outer) {
    // Centering.
    for (;;) {
      if (res.newton >= opts.max_newton) {
        res.budget_exhausted = true;
        return res;
      }
      Eigen::LLT<Mat> llt(slack(m, s));
      const Mat sinv = llt.solve(eye);
      for (int i = 0; i < n; ++i) g_mats[i] = sinv * p.q[i];
      g_mats[n] = sinv;
      const double gball = r2 - m.squaredNorm();

      Vec grad(nv);
      Mat hess(nv, nv);
      for (int k = 0; k < nv; ++k) grad(k) = -g_mats[k].trace();
      grad(n) += t;
      for (int i = 0; i < n; ++i) grad(i) += 2.0 * m(i) / gball;
      for (int k = 0; k < nv; ++k)
        for (int l = k; l < nv; ++l) {
          const double h = g_mats[k].cwiseProduct(g_mats[l].transpose()).sum();
          hess(k, l) = h;
          hess(l, k) = h;
        }
      hess.topLeftCorner(n, n) += (2.0 / gball) * Mat::Identity(n, n) +
                                  (4.0 / (gball * gball)) * (m * m.transpose());

      Eigen::LDLT<Mat> ldlt(hess);
      Vec step = -ldlt.solve(grad);
      if (!step.allFinite() || ldlt.info() != Eigen::Success) {
        const double ridge = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        step = -(hess + ridge * Mat::Identity(nv, nv)).ldlt().solve(grad);
      }
      const double decrement2 = -grad.dot(step);
      if (!(decrement2 > 0.0) || 0.5 * decrement2 <= opts.newton_tol ||
          grad.norm() <= opts.newton_tol) {
        last_decrement = decrement2 > 0.0 ? std::sqrt(decrement2) : 0.0;
        break;
      }

      bool ok = false;
      const double f0 = objective(m, s, ok);
      double tau = 1.0;
      bool moved = false;
      while (tau > 1e-14) {
        const Vec m_try = m + tau * step.head(n);
        const double s_try = s + tau * step(n);
        bool ok_try = false;
        const double f1 = objective(m_try, s_try, ok_try);
        if (ok_try && f1 <= f0 - 0.25 * tau * decrement2) {
          m = m_try;
          s = s_try;
          moved = true;
          break;
        }
        tau *= 0.5;
      }
      ++res.newton;
      last_decrement = std::sqrt(decrement2);
      // Roundoff-limited line search: the point is as centered as it gets.
      if (!moved || tau < 1e-8) break;

      if (s < 0.0 && track(m) < level) {
        res.kind = InnerResult::Kind::Feasible;
        return res;
      }
    }

    track(m);
    // Duality-gap bound, widened for imperfect centering.
    const double gap = (degree + std::sqrt(degree) * std::min(1.0, last_decrement)) / t;
    res.lower_bound = level + s - gap;
    if (s - gap > 0.0) {
      res.kind = InnerResult::Kind::Infeasible;
      return res;
    }
    if (gap < 0.05 * opts.tol) return res;
    t *= 10.0;
  }
  return res;
}

struct SgResult {
  double value = std::numeric_limits<double>::infinity();
  Vec m;
  int iterations = 0;
};

// Spectral subgradient descent with Polyak steps toward an adaptive target
// level best - delta; delta halves whenever progress stalls.
SgResult subgradient_run(const QuadraticSystem& sys, const Vec& m0, const SolverOptions& opts,
                         double scale) {
  SgResult best;
  Vec m = m0;
  SpectralValue sv = spectral_value(sys, m);
  best.value = sv.value;
  best.m = m;
  double delta = 0.1 * scale;
  int stall = 0;
  int k = 0;
  for (; k < opts.max_subgradient; ++k) {
    const double gn2 = sv.subgradient.squaredNorm();
    if (gn2 < 1e-28) break;
    const double target = best.value - delta;
    Vec step = -((sv.value - target) / gn2) * sv.subgradient;
    if (sv.gap < 1e-8) {
      const double radius = 1e-3 * (1.0 + m.norm());
      const double len = step.norm();
      if (len > radius) step *= radius / len;
    }
    m += step;
    sv = spectral_value(sys, m);
    if (sv.value <= best.value - 0.5 * delta) {
      best.value = sv.value;
      best.m = m;
      stall = 0;
    } else {
      if (sv.value < best.value) {
        best.value = sv.value;
        best.m = m;
      }
      if (++stall >= 20) {
        delta *= 0.5;
        m = best.m;
        sv = spectral_value(sys, m);
        stall = 0;
      }
    }
    if (delta < 1e-3 * opts.tol * scale) break;
  }
  best.iterations = k;
  return best;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

SgResult subgradient_search(const QuadraticSystem& sys, const Lmi& p, const SolverOptions& opts) {
  const int n = sys.n();
  const int restarts = std::max(1, opts.restarts);
  const double qn = sys.q_norm();
  const double spread =
      qn > 0.0 ? std::min(p.radius, std::max(1.0, sys.L().norm()) / qn) : 1.0;

  std::vector<Vec> starts(static_cast<std::size_t>(restarts), Vec::Zero(n));
  for (int r = 1; r < restarts; ++r) {
    std::mt19937_64 rng(opts.seed + 1000003ULL * static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> uni(-spread, spread);
    for (int i = 0; i < n; ++i) starts[r](i) = uni(rng);
  }

  std::vector<SgResult> runs(static_cast<std::size_t>(restarts));
#pragma omp parallel for schedule(dynamic) if (opts.parallel_restarts)
  for (int r = 0; r < restarts; ++r) runs[r] = subgradient_run(sys, starts[r], opts, p.scale);

  SgResult best = runs[0];
  int total = 0;
  for (const SgResult& r : runs) {
    total += r.iterations;
    if (r.value < best.value || (r.value == best.value && lex_less(r.m, best.m))) best = r;
  }
  best.iterations = total;
  return best;
}

}  // namespace

TrapVerdict verdict_of(const TrapResult& r, double tol) {
  if (r.a_star < -tol) return TrapVerdict::BoundedCertified;
  if (r.a_star > tol) return TrapVerdict::NoTrappingRegion;
  return TrapVerdict::Marginal;
}

TrapResult solve(const QuadraticSystem& sys, const SolverOptions& opts) {
  const Lmi p = make_lmi(sys, opts);
  const int n = sys.n();
  const SymEigen ls_eig = jacobi_eigen(p.ls);

  TrapResult out;
  SolverInfo& info = out.info;

  // lambda_max(A_s(m)) >= m^T A_s(m) m / |m|^2 = m^T Ls m / |m|^2 because
  // m . phi(m) = 0, so a* is bracketed by the extreme eigenvalues of Ls.
  double lo = ls_eig.values(0);
  double hi = ls_eig.values(n - 1);
  Vec m_best = Vec::Zero(n);

  const bool use_barrier = opts.method != TrapMethod::Subgradient;
  const bool use_subgradient = opts.method != TrapMethod::Barrier;

  if (use_barrier) {
    int steps = 0;
    while (hi - lo > opts.tol && steps < opts.max_bisection) {
      const double mid = 0.5 * (lo + hi);
      const double width = hi - lo;
      const InnerResult r = solve_level(p, mid, m_best, opts);
      info.newton_steps += r.newton;
      if (r.value_best < hi) {
        hi = r.value_best;
        m_best = r.m_best;
      }
      if (r.kind == InnerResult::Kind::Infeasible) {
        lo = std::max(lo, r.lower_bound);
      } else if (r.kind == InnerResult::Kind::Undecided) {
        lo = std::max(lo, std::min(r.lower_bound, hi));
        if (r.budget_exhausted) info.warnings.push_back("Newton budget exhausted in inner solve");
        if (hi - lo >= width) {
          ++steps;
          break;
        }
      }
      lo = std::min(lo, hi);
      ++steps;
    }
    info.bisection_steps = steps;
    info.barrier_value = hi;
    if (hi - lo > 100.0 * opts.tol) {
      std::ostringstream msg;
      msg << "bisection bracket [" << lo << ", " << hi << "] not converged after " << steps
          << " steps";
      throw Error(ErrorCode::MaxIterations, msg.str());
    }
  }

  Vec m_star = m_best;
  info.method_used = "barrier";
  if (use_subgradient) {
    const SgResult sg = subgradient_search(sys, p, opts);
    info.subgradient_iterations = sg.iterations;
    info.subgradient_value = sg.value;
    if (!use_barrier) {
      m_star = sg.m;
      info.method_used = "subgradient";
    } else {
      if (std::abs(sg.value - hi) > opts.disagreement_warn) {
        std::ostringstream msg;
        msg << "barrier (" << hi << ") and subgradient (" << sg.value
            << ") optima disagree by more than " << opts.disagreement_warn;
        info.warnings.push_back(msg.str());
      }
      if (sg.value < hi - opts.tol) {
        m_star = sg.m;
        info.method_used = "subgradient (better than barrier)";
      } else {
        info.method_used = "barrier (subgradient cross-check)";
      }
    }
  }

  out.m_star = m_star;
  out.a_star = lambda_max_sym(symmetric_linear_part(sys, m_star)).value;
  info.lower_bound = use_barrier ? std::min(lo, out.a_star) : ls_eig.values(0);
  info.final_gap = out.a_star - info.lower_bound;
  info.marginal = std::abs(out.a_star) <= opts.tol;
  info.shift_at_ball = m_star.norm() > 0.9 * p.radius;
  if (info.shift_at_ball) {
    info.warnings.push_back("optimal shift lies near the search ball; a* may only be approached");
  }
  out.status = out.a_star < 0.0 ? TrapStatus::BoundedCertified : TrapStatus::NoTrappingRegion;
  return out;
}

std::optional<Vec> feasibility_at(const QuadraticSystem& sys, double a,
                                  const SolverOptions& opts) {
  const Lmi p = make_lmi(sys, opts);
  const InnerResult r = solve_level(p, a, Vec::Zero(sys.n()), opts);
  if (r.kind == InnerResult::Kind::Feasible) return r.m_best;
  if (r.budget_exhausted) {
    throw Error(ErrorCode::MaxIterations, "feasibility_at: Newton budget exhausted");
  }
  return std::nullopt;
}

TrapVerdict verdict(const QuadraticSystem& sys, const SolverOptions& opts) {
  return verdict_of(solve(sys, opts), opts.tol);
}

}  // namespace epq
