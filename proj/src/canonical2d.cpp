#include "epq/canonical2d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epq/errors.hpp"

namespace epq {

QuadraticSystem Canonical2D::system() const {
  Mat q1(2, 2), q2(2, 2);
  q1 << 0.0, 0.5 * q0, 0.5 * q0, 0.0;
  q2 << -q0, 0.0, 0.0, 0.0;
  return QuadraticSystem::create(Vec(c_hat), Mat(L_hat()), {q1, q2});
}

Canonical2D make_canonical(const Eigen::Vector2d& c, const Eigen::Matrix2d& l, double q0) {
  if (!(q0 > 0.0)) throw Error(ErrorCode::TrivialNonlinearity, "canonical form needs q0 > 0");
  Canonical2D out;
  out.c_hat = c;
  out.l11 = l(0, 0);
  out.l12 = l(0, 1);
  out.l21 = l(1, 0);
  out.l22 = l(1, 1);
  out.q0 = q0;
  return out;
}

Eigen::Vector2d extract_q(const QuadraticSystem& sys) {
  if (sys.n() != 2) {
    std::ostringstream msg;
    msg << "extract_q: system has n = " << sys.n() << ", expected 2";
    throw Error(ErrorCode::WrongDimension, msg.str());
  }
  const Mat& a = sys.Q(0);
  const Mat& b = sys.Q(1);
  const Eigen::Vector2d q(2.0 * a(0, 1), a(1, 1));
  const double tol = kStructuralTol * std::max(1.0, q.norm());
  const double mismatch = std::max({std::abs(q(0) + b(0, 0)), std::abs(q(1) + 2.0 * b(0, 1)),
                                    std::abs(a(0, 0)), std::abs(b(1, 1))});
  if (mismatch > tol) {
    std::ostringstream msg;
    msg << "extract_q: Q(1) and Q(2) disagree on (q1, q2) by " << mismatch;
    throw Error(ErrorCode::InconsistentParameterization, msg.str());
  }
  return q;
}

Eigen::Matrix2d canonical_rotation(const Eigen::Vector2d& q) {
  const double q0 = q.norm();
  Eigen::Matrix2d r;
  r << q(0), q(1), -q(1), q(0);
  return r / q0;
}

Canonical2D to_canonical(const QuadraticSystem& sys) {
  const Eigen::Vector2d q = extract_q(sys);
  const double q0 = q.norm();
  if (q0 <= kStructuralTol * std::max(1.0, sys.L().norm())) {
    throw Error(ErrorCode::TrivialNonlinearity,
                "nonlinearity is zero; the canonical form is undefined (treat as linear)");
  }
  const Eigen::Matrix2d r = canonical_rotation(q);
  const Eigen::Vector2d c_hat = r * Eigen::Vector2d(sys.c());
  const Eigen::Matrix2d l_hat = r * Eigen::Matrix2d(sys.L()) * r.transpose();
  Canonical2D out = make_canonical(c_hat, l_hat, q0);
  out.R = r;
  return out;
}

std::optional<Eigen::Vector2d> lmi_feasible_2d(const Canonical2D& canon, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NotApplicable, "lmi_feasible_2d: eps must be > 0");
  if (canon.l22 > 0.0) return std::nullopt;
  return Eigen::Vector2d((canon.l12 + canon.l21) / canon.q0, -(canon.l11 + eps) / canon.q0);
}

Eigen::Vector2d escape_certificate(const Canonical2D& canon) {
  if (!(canon.l22 > 0.0)) {
    throw Error(ErrorCode::NotApplicable, "escape_certificate requires l22 > 0");
  }
  const double k = canon.c_hat(1) + canon.l21 * canon.l21 / (4.0 * canon.q0) + 1.0;
  return Eigen::Vector2d(0.0, -k / canon.l22 - 1.0);
}

const char* to_string(TwoDClass c) {
  return c == TwoDClass::LmiFeasible ? "LmiFeasible" : "UnboundedCertified";
}

TwoDVerdict classify_2d(const QuadraticSystem& sys, double eps) {
  TwoDVerdict v;
  v.canon = to_canonical(sys);
  if (auto m = lmi_feasible_2d(v.canon, eps)) {
    v.lmi_feasible = true;
    v.witness_m = *m;
    v.classification = TwoDClass::LmiFeasible;
  } else {
    v.lmi_feasible = false;
    v.escape_x0 = escape_certificate(v.canon);
    v.classification = TwoDClass::UnboundedCertified;
  }
  return v;
}

}  // namespace epq
