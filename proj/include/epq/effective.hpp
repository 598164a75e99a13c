#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epq/linalg.hpp"
#include "epq/system.hpp"

namespace epq {

inline constexpr double kVerifyTol = 1e-10;
inline constexpr double kDiscoveryTol = 1e-8;

/// Proper nontrivial linear subspace with an orthonormal basis (n x k,
/// 1 <= k <= n-1).
class Subspace {
 public:
  /// Orthonormalizes the columns of `spanning`; throws DimensionMismatch when
  /// the span is {0} or the whole space.
  static Subspace span_of(const Mat& spanning, std::string label = {});
  /// Uses `basis` verbatim; it must already be orthonormal to 1e-12.
  static Subspace from_orthonormal(Mat basis, std::string label = {});
  static Subspace coordinate(int n, const std::vector<int>& axes);

  const Mat& basis() const { return basis_; }
  int n() const { return static_cast<int>(basis_.rows()); }
  int k() const { return static_cast<int>(basis_.cols()); }
  const std::string& label() const { return label_; }

  bool contains(const Vec& v, double tol) const;
  /// Same dimension and each basis is within `tol` of the other span.
  bool same_as(const Subspace& other, double tol) const;

 private:
  Subspace(Mat basis, std::string label) : basis_(std::move(basis)), label_(std::move(label)) {}

  Mat basis_;
  std::string label_;
};

/// Condition 1: b_p^T Q(i) b_q = 0 for every i and basis pair.
bool phi_vanishes_on(const QuadraticSystem& sys, const Subspace& v, double tol = kVerifyTol);
double phi_restriction_residual(const QuadraticSystem& sys, const Subspace& v);

/// Condition 2: c in V and L b in V for every basis column b.
bool affine_invariant_on(const QuadraticSystem& sys, const Subspace& v, double tol = kVerifyTol);

bool is_ineffectiveness_witness(const QuadraticSystem& sys, const Subspace& v,
                                double tol = kVerifyTol);

/// Unit directions v with phi(v) = 0 found from a sphere grid polished by
/// Gauss-Newton; deduplicated up to sign.
std::vector<Vec> vanishing_directions(const QuadraticSystem& sys);

/// Largest L-invariant subspace contained in span(basis) (may be empty).
Mat maximal_invariant_subspace(const Mat& l, const Mat& basis, double tol);

std::vector<Subspace> generate_candidates(const QuadraticSystem& sys);

enum class Effectiveness { Effective, Ineffective, Unknown };
const char* to_string(Effectiveness e);

struct CandidateCheck {
  Subspace subspace;
  bool phi_vanishes = false;
  bool invariant = false;
  double phi_residual = 0.0;
  double invariance_residual = 0.0;
  /// When condition 2 fails: the first image (c or L b) that leaves V.
  Vec escaping_image;
  std::string escaping_label;
};

CandidateCheck check_candidate(const QuadraticSystem& sys, const Subspace& v);

struct EffectivenessVerdict {
  Effectiveness result = Effectiveness::Unknown;
  std::optional<Subspace> witness;
  std::vector<CandidateCheck> candidates_checked;
  /// Which argument certifies that the candidate list is exhaustive.
  std::string exhaustiveness;
};

EffectivenessVerdict check_effective(const QuadraticSystem& sys);

}  // namespace epq
