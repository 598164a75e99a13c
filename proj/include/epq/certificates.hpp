#pragma once

#include <cstdint>
#include <utility>

#include "epq/linalg.hpp"
#include "epq/system.hpp"

namespace epq {

/// Quartic Lyapunov certificate V(x) = z(x)^T Mv z(x) over the lift
/// z(x) = (x1, x2, x3, x3^2), with dV/dt = -z^T Md z and decay rate alpha
/// certified by N = -Md + alpha Mv being negative semidefinite.
struct QuarticCertificate {
  Mat Mv;
  Mat Md;
  double alpha = 0.0;

  Mat N() const { return -Md + alpha * Mv; }
};

Eigen::Vector4d lift(const Vec& x);

/// The three-state bounded system whose A_s(m) has a positive eigenvalue for
/// every shift, together with its quartic certificate.
std::pair<QuadraticSystem, QuarticCertificate> builtin_counterexample();

double lyapunov_value(const QuarticCertificate& cert, const Vec& x);

/// dV/dt = grad V(x) . f(x), evaluated through the chain rule of the lift.
double lyapunov_rate(const QuadraticSystem& sys, const QuarticCertificate& cert, const Vec& x);

/// |dV/dt + z^T Md z| / max(1, |z|^2)
double derivative_identity_residual(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                    const Vec& x);

struct VerifyOptions {
  int samples = 1000;
  double tol = 1e-8;
  double box = 10.0;
  int trajectories = 5;
  double t_final = 20.0;
  double radius = 5.0;
  std::uint64_t seed = 1;
};

struct CertificateReport {
  Vec mv_eigs;
  Vec n_eigs;
  double n_trace = 0.0;
  double max_derivative_residual = 0.0;
  /// Worst observed V(x(t)) / (V(x0) exp(-alpha t)) over the decay runs.
  double worst_decay_ratio = 0.0;
  bool mv_positive = false;
  bool identity_holds = false;
  bool n_nonpositive = false;
  bool decay_check = false;

  bool passed() const { return mv_positive && identity_holds && n_nonpositive && decay_check; }
};

CertificateReport verify_certificate(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                     const VerifyOptions& opts = {});

}  // namespace epq
