#pragma once

#include <optional>

#include "epq/linalg.hpp"
#include "epq/system.hpp"

namespace epq {

/// Two-state system rotated so that the nonlinearity parameter q lies along
/// e1:  dx/dt = c + L x + q0 (x1 x2, -x1^2).
struct Canonical2D {
  Eigen::Vector2d c_hat;
  double l11 = 0.0, l12 = 0.0, l21 = 0.0, l22 = 0.0;
  double q0 = 1.0;
  /// Rotation with R q = |q| e1 (det R = +1).
  Eigen::Matrix2d R = Eigen::Matrix2d::Identity();

  Eigen::Matrix2d L_hat() const {
    Eigen::Matrix2d l;
    l << l11, l12, l21, l22;
    return l;
  }

  /// The canonical system as a QuadraticSystem.
  QuadraticSystem system() const;
};

/// Builds canonical data directly (R = I). Requires q0 > 0.
Canonical2D make_canonical(const Eigen::Vector2d& c, const Eigen::Matrix2d& l, double q0);

/// Every energy-preserving 2D family is Q(1) = [[0, q1/2], [q1/2, q2]],
/// Q(2) = [[-q1, -q2/2], [-q2/2, 0]], so phi(x) = (q.x) (x2, -x1).
Eigen::Vector2d extract_q(const QuadraticSystem& sys);

/// Rotation in SO(2) mapping q to |q| e1.
Eigen::Matrix2d canonical_rotation(const Eigen::Vector2d& q);

Canonical2D to_canonical(const QuadraticSystem& sys);

/// Shift making A_s(m) = diag(-eps, l22) when l22 <= 0; empty when l22 > 0,
/// in which case A_s(m) has l22 on its diagonal for every m.
std::optional<Eigen::Vector2d> lmi_feasible_2d(const Canonical2D& canon, double eps = 1.0);

/// Initial state (0, x2) with x2 = -k/l22 - 1, k = c2 + l21^2/(4 q0) + 1.
/// Along the flow x2(t) < x2(0) - t. Requires l22 > 0.
Eigen::Vector2d escape_certificate(const Canonical2D& canon);

enum class TwoDClass { LmiFeasible, UnboundedCertified };
const char* to_string(TwoDClass c);

struct TwoDVerdict {
  bool lmi_feasible = false;
  std::optional<Eigen::Vector2d> witness_m;   ///< canonical coordinates
  std::optional<Eigen::Vector2d> escape_x0;   ///< canonical coordinates
  TwoDClass classification = TwoDClass::LmiFeasible;
  Canonical2D canon;
};

TwoDVerdict classify_2d(const QuadraticSystem& sys, double eps = 1.0);

}  // namespace epq
