#include <doctest.h>

#include <random>

#include "epq/certificates.hpp"
#include "epq/errors.hpp"
#include "epq/simulate.hpp"
#include "fixtures.hpp"

using namespace epq;

TEST_CASE("builtin data") {
  const auto [sys, cert] = builtin_counterexample();
  CHECK(sys.n() == 3);
  CHECK(cert.alpha == 0.1);
  CHECK(asymmetry(cert.Mv) == 0.0);
  CHECK(asymmetry(cert.Md) == 0.0);
  const auto z = lift(fx::vec({1, 2, 3}));
  CHECK(z(3) == 9.0);
}

TEST_CASE("M_v and N spectra") {
  const auto [sys, cert] = builtin_counterexample();
  const Vec mv = jacobi_eigen(cert.Mv).values;
  const double expect_mv[] = {0.7339, 55.85, 114.2, 136.3};
  for (int k = 0; k < 4; ++k) CHECK(mv(k) == doctest::Approx(expect_mv[k]).epsilon(1e-3));
  const Vec ne = jacobi_eigen(cert.N()).values;
  CHECK(ne.maxCoeff() < 0.0);
  CHECK(ne.sum() == doctest::Approx(-845.3).epsilon(1e-9));
  CHECK(cert.N().trace() == doctest::Approx(-845.3).epsilon(1e-12));
  // recomputed spectrum; the third value differs from the printed -2263.9
  const double expect_n[] = {-545.5362, -263.9445, -33.9458, -1.8735};
  for (int k = 0; k < 4; ++k) CHECK(ne(k) == doctest::Approx(expect_n[k]).epsilon(1e-4));
}

TEST_CASE("derivative identity is exact") {
  const auto [sys, cert] = builtin_counterexample();
  CHECK(lyapunov_rate(sys, cert, Vec::Zero(3)) == 0.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = fx::uniform_vec(rng, 3, -5, 5);
    const auto z = lift(x);
    CHECK(std::abs(lyapunov_rate(sys, cert, x) + z.dot(cert.Md * z)) <=
          1e-9 * std::max(1.0, z.squaredNorm()));
    CHECK(lyapunov_rate(sys, cert, x) <= -cert.alpha * lyapunov_value(cert, x) + 1e-9);
  }
}

TEST_CASE("rate matches a finite difference of V along f") {
  const auto [sys, cert] = builtin_counterexample();
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vec x = fx::uniform_vec(rng, 3, -2, 2);
    const Vec f = eval_rhs(sys, x);
    const double h = 1e-5;
    const double fd = (lyapunov_value(cert, x + h * f) - lyapunov_value(cert, x - h * f)) / (2 * h);
    CHECK(lyapunov_rate(sys, cert, x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("verification passes for the builtin pair") {
  const auto [sys, cert] = builtin_counterexample();
  const CertificateReport r = verify_certificate(sys, cert);
  CHECK(r.mv_positive);
  CHECK(r.identity_holds);
  CHECK(r.n_nonpositive);
  CHECK(r.decay_check);
  CHECK(r.passed());
  CHECK(r.worst_decay_ratio <= 1 + 1e-6);
}

TEST_CASE("perturbed M_v breaks the identity linearly") {
  const auto [sys, cert] = builtin_counterexample();
  double prev = 0.0;
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    QuarticCertificate bad = cert;
    bad.Mv(0, 0) += delta;
    const CertificateReport r = verify_certificate(sys, bad);
    CHECK_FALSE(r.identity_holds);
    CHECK_FALSE(r.passed());
    if (prev > 0) CHECK(r.max_derivative_residual / prev == doctest::Approx(10.0).epsilon(0.05));
    prev = r.max_derivative_residual;
  }
  QuarticCertificate set = cert;
  set.Mv(0, 0) = 1.0;
  CHECK_FALSE(verify_certificate(sys, set).passed());
}

TEST_CASE("large alpha makes N indefinite") {
  const auto [sys, cert] = builtin_counterexample();
  QuarticCertificate fast = cert;
  fast.alpha = 10.0;
  const CertificateReport r = verify_certificate(sys, fast);
  CHECK_FALSE(r.n_nonpositive);
  CHECK(r.n_eigs.maxCoeff() > 0);
  CHECK_FALSE(r.passed());
}

TEST_CASE("only 3D systems") {
  const auto cert = builtin_counterexample().second;
  try {
    verify_certificate(random_system(2, 1), cert);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotThreeDimensional);
  }
}

TEST_CASE("V exp(alpha t) is non-increasing along trajectories") {
  const auto [sys, cert] = builtin_counterexample();
  std::mt19937_64 rng(5);
  IntegrateOptions opts;
  opts.t_final = 20.0;
  opts.rtol = 1e-10;
  opts.atol = 1e-300;
  opts.norm_relative_error = true;
  opts.recording = Recording::Sampled;
  opts.output_dt = 0.05;
  for (int k = 0; k < 20; ++k) {
    Vec x0 = fx::uniform_vec(rng, 3, -1, 1);
    x0 *= 5.0 * std::cbrt(std::uniform_real_distribution<double>(0, 1)(rng)) / x0.norm();
    const auto traj = integrate(sys, x0, opts);
    double prev = lyapunov_value(cert, x0);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      const double w = lyapunov_value(cert, traj.states[i]) * std::exp(cert.alpha * traj.times[i]);
      CHECK(w <= prev * (1 + 1e-6));
      prev = w;
    }
    CHECK(traj.states.back().norm() < 1e-6);
  }
}
