#include "epq/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "epq/errors.hpp"
#include "epq/kernels.hpp"
#include "epq/simulate.hpp"

namespace epq {

namespace {

void require_three(const Vec& x, const char* what) {
  if (x.size() != 3) {
    std::ostringstream msg;
    msg << what << ": expected a 3-vector, got length " << x.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
}

void require_certificate_shape(const QuarticCertificate& cert) {
  if (cert.Mv.rows() != 4 || cert.Mv.cols() != 4 || cert.Md.rows() != 4 || cert.Md.cols() != 4) {
    throw Error(ErrorCode::DimensionMismatch, "certificate matrices must be 4x4");
  }
}

}  // namespace

Eigen::Vector4d lift(const Vec& x) {
  require_three(x, "lift");
  return {x(0), x(1), x(2), x(2) * x(2)};
}

std::pair<QuadraticSystem, QuarticCertificate> builtin_counterexample() {
  Mat l(3, 3);
  l << -2.0, 1.0, 0.0,
       -1.0, 0.5, 3.0,
        0.0, -3.0, -3.0;
  // phi(x) = (x2 x3, -x1 x3, 0)
  Mat q1 = Mat::Zero(3, 3), q2 = Mat::Zero(3, 3), q3 = Mat::Zero(3, 3);
  q1(1, 2) = q1(2, 1) = 0.5;
  q2(0, 2) = q2(2, 0) = -0.5;
  QuadraticSystem sys = QuadraticSystem::create(Vec::Zero(3), l, {q1, q2, q3});

  QuarticCertificate cert;
  cert.Mv.resize(4, 4);
  cert.Mv << 136, 0, 0, 6,
             0, 100, 25, 0,
             0, 25, 70, 0,
             6, 0, 0, 1;
  cert.Md.resize(4, 4);
  cert.Md << 544, -36, 25, 73,
             -36, 50, -27.5, -6,
             25, -27.5, 270, 0,
             73, -6, 0, 12;
  cert.alpha = 0.1;
  return {std::move(sys), std::move(cert)};
}

double lyapunov_value(const QuarticCertificate& cert, const Vec& x) {
  require_certificate_shape(cert);
  const Eigen::Vector4d z = lift(x);
  return z.dot(cert.Mv * z);
}

double lyapunov_rate(const QuadraticSystem& sys, const QuarticCertificate& cert, const Vec& x) {
  require_certificate_shape(cert);
  if (sys.n() != 3) throw Error(ErrorCode::DimensionMismatch, "lyapunov_rate: system is not 3D");
  const Eigen::Vector4d z = lift(x);
  const Vec f = eval_rhs(sys, x);
  // dz/dt = J f with J = d(x1, x2, x3, x3^2)/dx
  const Eigen::Vector4d zdot(f(0), f(1), f(2), 2.0 * x(2) * f(2));
  return 2.0 * z.dot(cert.Mv * zdot);
}

double derivative_identity_residual(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                    const Vec& x) {
  const Eigen::Vector4d z = lift(x);
  const double rate = lyapunov_rate(sys, cert, x);
  return std::abs(rate + z.dot(cert.Md * z)) / std::max(1.0, z.squaredNorm());
}

CertificateReport verify_certificate(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                     const VerifyOptions& opts) {
  if (sys.n() != 3) {
    throw Error(ErrorCode::NotThreeDimensional,
                "certificate lift (x1, x2, x3, x3^2) is defined for three-state systems only");
  }
  require_certificate_shape(cert);

  CertificateReport rep;
  const SymEigen mv = jacobi_eigen(cert.Mv);
  const Mat n_mat = cert.N();
  const SymEigen nn = jacobi_eigen(n_mat);
  rep.mv_eigs = mv.values;
  rep.n_eigs = nn.values;
  rep.n_trace = n_mat.trace();
  rep.mv_positive = mv.values.minCoeff() > 0.0;
  rep.n_nonpositive = nn.values.maxCoeff() <= opts.tol;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> box(-opts.box, opts.box);
  std::vector<Vec> pts(static_cast<std::size_t>(std::max(0, opts.samples)), Vec(3));
  for (Vec& p : pts)
    for (int i = 0; i < 3; ++i) p(i) = box(rng);
  rep.max_derivative_residual = kernels::max_identity_residual_omp(sys, cert, pts);
  rep.identity_holds = rep.max_derivative_residual < opts.tol;

  IntegrateOptions io;
  io.t_final = opts.t_final;
  io.rtol = 1e-10;
  io.atol = 1e-300;
  io.norm_relative_error = true;
  io.recording = Recording::Sampled;
  io.output_dt = 0.05;
  ProbeOptions po;
  po.trials = std::max(0, opts.trajectories);
  po.radius = opts.radius;
  po.seed = opts.seed + 17;
  po.axis_points = false;
  std::vector<Vec> x0s = probe_initial_conditions(3, po);
  const auto trajs = kernels::map_indexed_omp(
      x0s.size(), [&](std::size_t i) { return integrate(sys, x0s[i], io); });

  double worst = 0.0;
  bool ok = true;
  for (const Trajectory& tr : trajs) {
    if (tr.status != TrajectoryStatus::Completed) ok = false;
    const double v0 = lyapunov_value(cert, tr.states.front());
    if (v0 <= 0.0) continue;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double bound = v0 * std::exp(-cert.alpha * tr.times[k]);
      const double ratio = lyapunov_value(cert, tr.states[k]) / bound;
      worst = std::max(worst, ratio);
    }
  }
  rep.worst_decay_ratio = worst;
  rep.decay_check = ok && worst <= 1.0 + 1e-6;
  return rep;
}

}  // namespace epq
