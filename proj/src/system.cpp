#include "epq/system.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "epq/errors.hpp"

namespace epq {

namespace {

void require_length(const Vec& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << what << ": expected length " << n << ", got " << v.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
}

}  // namespace

EnergyResidual energy_preserving_residual(const std::vector<Mat>& q) {
  EnergyResidual worst;
  const int n = static_cast<int>(q.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double r = std::abs(q[i](j, k) + q[j](i, k) + q[k](i, j));
        if (r > worst.value) worst = {r, i, j, k};
      }
  return worst;
}

QuadraticSystem QuadraticSystem::create(int n, Vec c, Mat l, std::vector<Mat> q) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "system dimension must be positive");
  std::ostringstream msg;
  if (c.size() != n) {
    msg << "c has length " << c.size() << ", expected " << n;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (l.rows() != n || l.cols() != n) {
    msg << "L is " << l.rows() << "x" << l.cols() << ", expected " << n << "x" << n;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (static_cast<int>(q.size()) != n) {
    msg << "expected " << n << " Q matrices, got " << q.size();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  for (int i = 0; i < n; ++i) {
    Mat& qi = q[static_cast<std::size_t>(i)];
    if (qi.rows() != n || qi.cols() != n) {
      msg << "Q(" << i + 1 << ") is " << qi.rows() << "x" << qi.cols() << ", expected " << n
          << "x" << n;
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    const double asym = asymmetry(qi);
    if (asym > kStructuralTol) {
      msg << "Q(" << i + 1 << ") asymmetry " << asym << " exceeds " << kStructuralTol;
      throw Error(ErrorCode::NotSymmetric, msg.str());
    }
    qi = 0.5 * (qi + qi.transpose()).eval();
  }
  const EnergyResidual r = energy_preserving_residual(q);
  if (r.value > kStructuralTol) {
    msg << "energy-preserving residual " << r.value << " at (i,j,k)=(" << r.i + 1 << ","
        << r.j + 1 << "," << r.k + 1 << ")";
    throw Error(ErrorCode::NotEnergyPreserving, msg.str());
  }
  return QuadraticSystem(std::move(c), std::move(l), std::move(q));
}

QuadraticSystem QuadraticSystem::create(Vec c, Mat l, std::vector<Mat> q) {
  const int n = static_cast<int>(c.size());
  return create(n, std::move(c), std::move(l), std::move(q));
}

double QuadraticSystem::q_norm() const {
  double s = 0.0;
  for (const Mat& qi : q_) s += qi.squaredNorm();
  return std::sqrt(s);
}

Vec eval_nonlinearity(const QuadraticSystem& sys, const Vec& x) {
  require_length(x, sys.n(), "eval_nonlinearity");
  Vec out(sys.n());
  for (int i = 0; i < sys.n(); ++i) out(i) = x.dot(sys.Q(i) * x);
  return out;
}

Vec eval_rhs(const QuadraticSystem& sys, const Vec& x) {
  require_length(x, sys.n(), "eval_rhs");
  return sys.c() + sys.L() * x + eval_nonlinearity(sys, x);
}

ShiftedSystem shift(const QuadraticSystem& sys, const Vec& m) {
  require_length(m, sys.n(), "shift");
  const int n = sys.n();
  Mat stacked(n, n);
  for (int i = 0; i < n; ++i) stacked.row(i) = (sys.Q(i) * m).transpose();
  Mat a = sys.L() + 2.0 * stacked;
  Mat a_s = 0.5 * (a + a.transpose());
  Vec d = sys.c() + sys.L() * m + eval_nonlinearity(sys, m);
  return ShiftedSystem{sys, m, std::move(d), std::move(a), std::move(a_s)};
}

Mat symmetric_linear_part(const QuadraticSystem& sys, const Vec& m) {
  require_length(m, sys.n(), "symmetric_linear_part");
  Mat out = sys.L_sym();
  for (int i = 0; i < sys.n(); ++i) out -= m(i) * sys.Q(i);
  return out;
}

double energy_rate(const ShiftedSystem& shifted, const Vec& y) {
  require_length(y, shifted.base.n(), "energy_rate");
  return 2.0 * (shifted.d.dot(y) + y.dot(shifted.A_s * y));
}

QuadraticSystem rotate(const QuadraticSystem& sys, const Mat& r) {
  const int n = sys.n();
  if (r.rows() != n || r.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "rotate: R must be n x n");
  }
  std::vector<Mat> conj(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) conj[j] = r * sys.Q(j) * r.transpose();
  std::vector<Mat> q(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) q[i] += r(i, j) * conj[j];
    q[i] = 0.5 * (q[i] + q[i].transpose()).eval();
  }
  // Roundoff from the congruence can leave ~1e-16 residuals; re-project so
  // the result validates at the structural tolerance.
  return QuadraticSystem::create(r * sys.c(), r * sys.L() * r.transpose(),
                                 project_energy_preserving(q));
}

std::vector<Mat> project_energy_preserving(const std::vector<Mat>& q) {
  const int n = static_cast<int>(q.size());
  std::vector<Mat> out(q.size());
  for (int i = 0; i < n; ++i) {
    out[i] = Mat(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double sym = (q[i](j, k) + q[j](i, k) + q[k](i, j)) / 3.0;
        out[i](j, k) = q[i](j, k) - sym;
      }
    out[i] = 0.5 * (out[i] + out[i].transpose()).eval();
  }
  return out;
}

QuadraticSystem random_system(int n, std::uint64_t seed, double scale) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidDimension,
                "random_system: n must be >= 2 (energy-preserving phi is zero for n = 1)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-scale, scale);
  Vec c(n);
  for (int i = 0; i < n; ++i) c(i) = uni(rng);
  Mat l(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) l(i, j) = uni(rng);
  std::vector<Mat> q(static_cast<std::size_t>(n), Mat(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = uni(rng);
        q[i](j, k) = v;
        q[i](k, j) = v;
      }
  return QuadraticSystem::create(n, std::move(c), std::move(l), project_energy_preserving(q));
}

}  // namespace epq
