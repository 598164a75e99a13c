#pragma once

#include <cstdint>
#include <vector>

#include "epq/linalg.hpp"

namespace epq {

inline constexpr double kStructuralTol = 1e-12;

/// Worst violation of Q(i)_jk + Q(j)_ik + Q(k)_ij = 0. Indices are 0-based.
struct EnergyResidual {
  double value = 0.0;
  int i = 0, j = 0, k = 0;
};

EnergyResidual energy_preserving_residual(const std::vector<Mat>& q);

/// dx/dt = c + L x + phi(x), phi_i(x) = x^T Q(i) x, with the Q(i) forming an
/// energy-preserving family (x . phi(x) = 0). Immutable after construction.
class QuadraticSystem {
 public:
  /// Validates dimensions, symmetry and the energy-preserving identity.
  /// Q entries with asymmetry below 1e-12 are symmetrized; anything larger is
  /// rejected.
  static QuadraticSystem create(int n, Vec c, Mat l, std::vector<Mat> q);
  static QuadraticSystem create(Vec c, Mat l, std::vector<Mat> q);

  int n() const { return static_cast<int>(c_.size()); }
  const Vec& c() const { return c_; }
  const Mat& L() const { return l_; }
  const Mat& Q(int i) const { return q_[static_cast<std::size_t>(i)]; }
  const std::vector<Mat>& Qs() const { return q_; }

  /// (L + L^T) / 2
  Mat L_sym() const { return 0.5 * (l_ + l_.transpose()); }

  double q_norm() const;
  bool has_trivial_nonlinearity() const { return q_norm() == 0.0; }

 private:
  QuadraticSystem(Vec c, Mat l, std::vector<Mat> q)
      : c_(std::move(c)), l_(std::move(l)), q_(std::move(q)) {}

  Vec c_;
  Mat l_;
  std::vector<Mat> q_;
};

/// The system in shifted coordinates y = x - m:
/// dy/dt = d + A y + phi(y).
struct ShiftedSystem {
  QuadraticSystem base;
  Vec m;
  Vec d;
  Mat A;
  Mat A_s;
};

Vec eval_nonlinearity(const QuadraticSystem& sys, const Vec& x);
Vec eval_rhs(const QuadraticSystem& sys, const Vec& x);

ShiftedSystem shift(const QuadraticSystem& sys, const Vec& m);

/// (L + L^T)/2 - sum_i m_i Q(i)
Mat symmetric_linear_part(const QuadraticSystem& sys, const Vec& m);

/// Exact time derivative of K(y) = y^T y along the shifted flow:
/// dK/dt = 2 (d^T y + y^T A_s y). The nonlinearity drops out because
/// y . phi(y) = 0.
double energy_rate(const ShiftedSystem& shifted, const Vec& y);

/// Orthogonal change of coordinates x_hat = R x. Returns the system in the
/// new coordinates (c_hat = R c, L_hat = R L R^T, Q_hat(i) = sum_j R_ij R Q(j) R^T).
QuadraticSystem rotate(const QuadraticSystem& sys, const Mat& r);

/// Projects arbitrary symmetric Q(i) onto the energy-preserving subspace by
/// removing the fully symmetric part of the tensor T_ijk = Q(i)_jk.
std::vector<Mat> project_energy_preserving(const std::vector<Mat>& q);

/// Random system with c, L uniform in [-scale, scale] and a random
/// energy-preserving Q family. Deterministic in `seed`.
QuadraticSystem random_system(int n, std::uint64_t seed, double scale = 1.0);

}  // namespace epq
