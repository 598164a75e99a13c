#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "epq/certificates.hpp"
#include "epq/linalg.hpp"
#include "epq/simulate.hpp"
#include "epq/system.hpp"

// Data-parallel kernels. Every OpenMP kernel has a serial twin that computes
// the same result in the same order; the tests hold them bit-identical and the
// benchmark compares their throughput.
namespace epq::kernels {

template <class F>
auto map_indexed_serial(std::size_t count, F&& f) {
  std::vector<decltype(f(std::size_t{0}))> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
  return out;
}

template <class F>
auto map_indexed_omp(std::size_t count, F&& f) {
  std::vector<decltype(f(std::size_t{0}))> out(count);
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  return out;
}

/// max over points of |x . phi(x)| / max(1, |x|^2)
double max_energy_product_serial(const QuadraticSystem& sys, const std::vector<Vec>& xs);
double max_energy_product_omp(const QuadraticSystem& sys, const std::vector<Vec>& xs);

/// max over points of the Lyapunov derivative identity residual
double max_identity_residual_serial(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                    const std::vector<Vec>& xs);
double max_identity_residual_omp(const QuadraticSystem& sys, const QuarticCertificate& cert,
                                 const std::vector<Vec>& xs);

struct GridMin {
  double value = 0.0;
  Vec m;
};

/// min of lambda_max(A_s(m)) over the tensor grid axis^n. Ties keep the first
/// grid point in lexicographic order.
GridMin lambda_max_grid_serial(const QuadraticSystem& sys, const std::vector<double>& axis);
GridMin lambda_max_grid_omp(const QuadraticSystem& sys, const std::vector<double>& axis);

std::vector<TrialSummary> run_trials_serial(const QuadraticSystem& sys,
                                            const std::vector<Vec>& x0s,
                                            const IntegrateOptions& opts);
std::vector<TrialSummary> run_trials_omp(const QuadraticSystem& sys, const std::vector<Vec>& x0s,
                                         const IntegrateOptions& opts);

}  // namespace epq::kernels
