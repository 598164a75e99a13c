#include "epq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epq::kernels {

namespace {

double energy_product(const QuadraticSystem& sys, const Vec& x) {
  return std::abs(x.dot(eval_nonlinearity(sys, x))) / std::max(1.0, x.squaredNorm());
}

Vec grid_point(const std::vector<double>& axis, int n, std::size_t index) {
  Vec m(n);
  const std::size_t base = axis.size();
  for (int i = n - 1; i >= 0; --i) {
    m(i) = axis[index % base];
    index /= base;
  }
  return m;
}

std::size_t grid_size(const std::vector<double>& axis, int n) {
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= axis.size();
  return total;
}

GridMin first_min(const QuadraticSystem& sys, const std::vector<double>& axis,
                  const std::vector<double>& values) {
  GridMin out;
  out.value = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < out.value) {
      out.value = values[i];
      arg = i;
    }
  }
  out.m = grid_point(axis, sys.n(), arg);
  return out;
}

}  // namespace

double max_energy_product_serial(const QuadraticSystem& sys, const std::vector<Vec>& xs) {
  double worst = 0.0;
  for (const Vec& x : xs) worst = std::max(worst, energy_product(sys, x));
  return worst;
}

double max_energy_product_omp(const QuadraticSystem& sys, const std::vector<Vec>& xs) {
  double worst = 0.0;
  const long long n = static_cast<long long>(xs.size());
#pragma omp parallel for reduction(max : worst)
  for (long long i = 0; i < n; ++i) {
    worst = std::max(worst, energy_product(sys, xs[static_cast<std::size_t>(i)]));
  }
  return worst;
}

double max_identity_residual_serial(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                    const std::vector<Vec>& xs) {
  double worst = 0.0;
  for (const Vec& x : xs) worst = std::max(worst, derivative_identity_residual(sys, cert, x));
  return worst;
}

double max_identity_residual_omp(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                 const std::vector<Vec>& xs) {
  double worst = 0.0;
  const long long n = static_cast<long long>(xs.size());
#pragma omp parallel for reduction(max : worst)
  for (long long i = 0; i < n; ++i) {
    worst = std::max(worst, derivative_identity_residual(sys, cert, xs[static_cast<std::size_t>(i)]));
  }
  return worst;
}

GridMin lambda_max_grid_serial(const QuadraticSystem& sys, const std::vector<double>& axis) {
  const std::size_t total = grid_size(axis, sys.n());
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) {
    values[i] =
        lambda_max_sym(symmetric_linear_part(sys, grid_point(axis, sys.n(), i))).value;
  }
  return first_min(sys, axis, values);
}

GridMin lambda_max_grid_omp(const QuadraticSystem& sys, const std::vector<double>& axis) {
  const std::size_t total = grid_size(axis, sys.n());
  std::vector<double> values(total);
  const long long count = static_cast<long long>(total);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    values[idx] =
        lambda_max_sym(symmetric_linear_part(sys, grid_point(axis, sys.n(), idx))).value;
  }
  return first_min(sys, axis, values);
}

std::vector<TrialSummary> run_trials_serial(const QuadraticSystem& sys,
                                            const std::vector<Vec>& x0s,
                                            const IntegrateOptions& opts) {
  return map_indexed_serial(x0s.size(),
                            [&](std::size_t i) { return run_trial(sys, x0s[i], opts); });
}

std::vector<TrialSummary> run_trials_omp(const QuadraticSystem& sys, const std::vector<Vec>& x0s,
                                         const IntegrateOptions& opts) {
  return map_indexed_omp(x0s.size(), [&](std::size_t i) { return run_trial(sys, x0s[i], opts); });
}

}  // namespace epq::kernels
