#pragma once

#include <random>
#include <vector>

#include "epq/certificates.hpp"
#include "epq/system.hpp"

namespace fx {

using epq::Mat;
using epq::Vec;

inline epq::QuadraticSystem counterexample() { return epq::builtin_counterexample().first; }

inline epq::QuadraticSystem lorenz(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0) {
  Mat l(3, 3);
  l << -sigma, sigma, 0, rho, -1, 0, 0, 0, -beta;
  std::vector<Mat> q(3, Mat::Zero(3, 3));
  q[1](0, 2) = q[1](2, 0) = -0.5;
  q[2](0, 1) = q[2](1, 0) = 0.5;
  return epq::QuadraticSystem::create(Vec::Zero(3), l, q);
}

inline epq::QuadraticSystem linear(const Mat& l, Vec c = {}) {
  const int n = static_cast<int>(l.rows());
  if (c.size() == 0) c = Vec::Zero(n);
  return epq::QuadraticSystem::create(c, l, std::vector<Mat>(n, Mat::Zero(n, n)));
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Mat random_symmetric(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return 0.5 * (a + a.transpose());
}

inline Mat rotation2(double theta) {
  Mat r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Largest eigenvalue by shifted power iteration; independent of Jacobi.
inline double power_lambda_max(const Mat& s, int iters = 20000) {
  const double shift = s.cwiseAbs().rowwise().sum().maxCoeff();
  const Mat b = s + shift * Mat::Identity(s.rows(), s.cols());
  Vec v = Vec::Ones(s.rows()).normalized();
  v(0) += 0.1;
  v.normalize();
  double lam = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = b * v;
    lam = v.dot(w);
    v = w.normalized();
  }
  return lam - shift;
}

}  // namespace fx
