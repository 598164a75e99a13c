#include "epq/effective.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "epq/errors.hpp"

namespace epq {

const char* to_string(Effectiveness e) {
  switch (e) {
    case Effectiveness::Effective: return "Effective";
    case Effectiveness::Ineffective: return "Ineffective";
    case Effectiveness::Unknown: return "Unknown";
  }
  return "?";
}

Subspace Subspace::span_of(const Mat& spanning, std::string label) {
  Mat basis = orthonormal_basis(spanning, 1e-10);
  if (basis.cols() == 0 || basis.cols() >= basis.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace must be nontrivial and proper");
  }
  return Subspace(std::move(basis), std::move(label));
}

Subspace Subspace::from_orthonormal(Mat basis, std::string label) {
  const Eigen::Index k = basis.cols();
  if (k == 0 || k >= basis.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace must be nontrivial and proper");
  }
  const double err = (basis.transpose() * basis - Mat::Identity(k, k)).cwiseAbs().maxCoeff();
  if (err > 1e-12) {
    throw Error(ErrorCode::DimensionMismatch, "subspace basis is not orthonormal");
  }
  return Subspace(std::move(basis), std::move(label));
}

Subspace Subspace::coordinate(int n, const std::vector<int>& axes) {
  Mat basis = Mat::Zero(n, static_cast<Eigen::Index>(axes.size()));
  std::ostringstream label;
  label << "span(";
  for (std::size_t j = 0; j < axes.size(); ++j) {
    basis(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
    label << (j ? "," : "") << "e" << axes[j] + 1;
  }
  label << ")";
  return from_orthonormal(std::move(basis), label.str());
}

bool Subspace::contains(const Vec& v, double tol) const {
  return distance_to_span(basis_, v) <= tol * std::max(1.0, v.norm());
}

bool Subspace::same_as(const Subspace& other, double tol) const {
  if (k() != other.k() || n() != other.n()) return false;
  const Mat resid = other.basis_ - basis_ * (basis_.transpose() * other.basis_);
  return resid.norm() <= tol;
}

namespace {

double q_scale(const QuadraticSystem& sys) {
  double s = 1.0;
  for (const Mat& q : sys.Qs()) s = std::max(s, q.cwiseAbs().maxCoeff());
  return s;
}

double affine_scale(const QuadraticSystem& sys) {
  return std::max({1.0, sys.L().cwiseAbs().maxCoeff(), sys.c().cwiseAbs().maxCoeff()});
}

bool vanishes(const QuadraticSystem& sys, const Mat& basis, double tol) {
  for (const Mat& q : sys.Qs()) {
    if ((basis.transpose() * q * basis).cwiseAbs().maxCoeff() > tol * q_scale(sys)) return false;
  }
  return true;
}

void require_match(const QuadraticSystem& sys, const Subspace& v) {
  if (v.n() != sys.n()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace dimension does not match the system");
  }
}

// Gauss-Newton on F(v) = (phi(v), |v|^2 - 1).
Vec polish_direction(const QuadraticSystem& sys, Vec v) {
  const int n = sys.n();
  Mat jac(n + 1, n);
  Vec res(n + 1);
  for (int it = 0; it < 40; ++it) {
    for (int i = 0; i < n; ++i) {
      const Vec qv = sys.Q(i) * v;
      res(i) = v.dot(qv);
      jac.row(i) = 2.0 * qv.transpose();
    }
    res(n) = v.squaredNorm() - 1.0;
    jac.row(n) = 2.0 * v.transpose();
    if (res.norm() < 1e-15) break;
    const Vec step = jac.completeOrthogonalDecomposition().solve(res);
    v -= step;
    if (step.norm() < 1e-15) break;
  }
  return v.normalized();
}

std::vector<Vec> sphere_samples(int n, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = std::numbers::pi * (k + 0.5) / count;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
  } else if (n == 3) {
    // Fibonacci lattice on the upper hemisphere (directions are taken up to sign).
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      out.push_back(v);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
      Vec v(n);
      for (int i = 0; i < n; ++i) v(i) = normal(rng);
      out.push_back(v.normalized());
    }
  }
  return out;
}

bool parallel_up_to_sign(const Vec& a, const Vec& b, double tol) {
  return std::min((a - b).norm(), (a + b).norm()) <= tol;
}

// Greedy merge of vanishing directions into maximal phi-vanishing subspaces.
std::vector<Mat> vanishing_components(const QuadraticSystem& sys, const std::vector<Vec>& dirs,
                                      bool& truncated) {
  constexpr std::size_t kMaxComponents = 64;
  const int n = sys.n();
  std::vector<Mat> comps;
  truncated = false;
  for (const Vec& v : dirs) {
    bool covered = false;
    for (const Mat& c : comps) {
      if (distance_to_span(c, v) <= 1e-6) {
        covered = true;
        break;
      }
    }
    if (covered) continue;
    bool merged = false;
    for (Mat& c : comps) {
      Mat joined(n, c.cols() + 1);
      joined << c, v;
      Mat basis = orthonormal_basis(joined, 1e-10);
      if (basis.cols() > c.cols() && vanishes(sys, basis, kDiscoveryTol)) {
        c = basis;
        merged = true;
        break;
      }
    }
    if (!merged) {
      if (comps.size() >= kMaxComponents) {
        truncated = true;
        continue;
      }
      comps.push_back(v);
    }
  }
  // Components absorbed by a later, larger component are dropped.
  std::vector<Mat> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    bool inside = false;
    for (std::size_t j = 0; j < comps.size() && !inside; ++j) {
      if (i == j || comps[j].cols() <= comps[i].cols()) continue;
      inside = (comps[i] - comps[j] * (comps[j].transpose() * comps[i])).norm() <= 1e-6;
    }
    if (!inside) out.push_back(comps[i]);
  }
  return out;
}

struct EigenBlock {
  Mat basis;
  std::complex<double> value;
};

// Real invariant blocks of L: eigenvectors for real eigenvalues, (Re, Im)
// planes for complex pairs. `simple` reports a spectrum of distinct values.
std::vector<EigenBlock> eigen_blocks(const Mat& l, bool& simple) {
  const Eigen::Index n = l.rows();
  Eigen::EigenSolver<Mat> es(l);
  const Eigen::VectorXcd vals = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  const double scale = std::max(1.0, l.cwiseAbs().maxCoeff());
  simple = true;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(vals(i) - vals(j)) <= 1e-6 * scale) simple = false;

  std::vector<EigenBlock> blocks;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (used[i]) continue;
    const std::complex<double> lam = vals(i);
    std::vector<Eigen::Index> group;
    for (Eigen::Index j = i; j < n; ++j) {
      if (!used[j] && std::abs(vals(j) - lam) <= 1e-8 * scale) group.push_back(j);
    }
    const bool real = std::abs(lam.imag()) <= 1e-10 * scale;
    if (!real) {
      // Mark the conjugate group as handled too.
      for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(vals(j) - std::conj(lam)) <= 1e-8 * scale) used[j] = true;
    }
    for (Eigen::Index j : group) used[j] = true;

    Mat span;
    if (real) {
      span = null_space(l - lam.real() * Mat::Identity(n, n), 1e-8 * scale);
      if (span.cols() == 0) span = vecs.col(i).real().normalized();
    } else {
      span.resize(n, 2 * static_cast<Eigen::Index>(group.size()));
      for (std::size_t g = 0; g < group.size(); ++g) {
        span.col(2 * g) = vecs.col(group[g]).real();
        span.col(2 * g + 1) = vecs.col(group[g]).imag();
      }
      span = orthonormal_basis(span, 1e-10);
    }
    blocks.push_back({span, lam});
  }
  return blocks;
}

Mat krylov_basis(const Mat& l, const Vec& c) {
  const Eigen::Index n = l.rows();
  Mat k(n, n);
  Vec v = c;
  for (Eigen::Index i = 0; i < n; ++i) {
    k.col(i) = v;
    v = l * v;
  }
  return orthonormal_basis(k, 1e-10);
}

class CandidateList {
 public:
  explicit CandidateList(int n) : n_(n) {}

  void add(const Mat& basis, const std::string& label) {
    if (basis.cols() < 1 || basis.cols() >= n_) return;
    Subspace s = basis.cols() == 1 && std::abs(basis.col(0).norm() - 1.0) < 1e-14
                     ? Subspace::from_orthonormal(basis, label)
                     : Subspace::span_of(basis, label);
    for (const Subspace& e : items_)
      if (e.same_as(s, 1e-8)) return;
    items_.push_back(std::move(s));
  }
  void add(Subspace s) {
    for (const Subspace& e : items_)
      if (e.same_as(s, 1e-8)) return;
    items_.push_back(std::move(s));
  }

  std::vector<Subspace> take() { return std::move(items_); }
  const std::vector<Subspace>& items() const { return items_; }

 private:
  int n_;
  std::vector<Subspace> items_;
};

// Ordered by dimension so the smaller coordinate subspaces come first.
void add_coordinate_subspaces_sorted(int n, CandidateList& list) {
  if (n > 4) return;
  for (int dim = 1; dim < n; ++dim) {
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) != dim) continue;
      std::vector<int> axes;
      for (int i = 0; i < n; ++i)
        if (mask & (1 << i)) axes.push_back(i);
      list.add(Subspace::coordinate(n, axes));
    }
  }
}

struct Generated {
  std::vector<Subspace> candidates;
  std::vector<Mat> components;
  bool components_truncated = false;
  bool simple_spectrum = false;
  std::size_t block_count = 0;
  Mat krylov;
};

constexpr std::size_t kMaxBlocksForSums = 16;

Generated generate(const QuadraticSystem& sys) {
  const int n = sys.n();
  Generated g;
  CandidateList list(n);
  if (n < 2) return g;

  add_coordinate_subspaces_sorted(n, list);

  bool simple = false;
  const std::vector<EigenBlock> blocks = eigen_blocks(sys.L(), simple);
  g.simple_spectrum = simple;
  g.block_count = blocks.size();
  if (blocks.size() <= kMaxBlocksForSums) {
    const std::size_t b = blocks.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << b); ++mask) {
      Eigen::Index dim = 0;
      for (std::size_t j = 0; j < b; ++j)
        if (mask & (std::size_t{1} << j)) dim += blocks[j].basis.cols();
      if (dim < 1 || dim >= n) continue;
      Mat span(n, dim);
      Eigen::Index col = 0;
      std::ostringstream label;
      label << "eig{";
      bool first = true;
      for (std::size_t j = 0; j < b; ++j) {
        if (!(mask & (std::size_t{1} << j))) continue;
        span.middleCols(col, blocks[j].basis.cols()) = blocks[j].basis;
        col += blocks[j].basis.cols();
        label << (first ? "" : ",") << blocks[j].value.real();
        if (blocks[j].value.imag() != 0.0) label << "+-" << std::abs(blocks[j].value.imag()) << "i";
        first = false;
      }
      label << "}";
      list.add(span, label.str());
    }
  }

  if (sys.c().norm() > 0.0) {
    g.krylov = krylov_basis(sys.L(), sys.c());
    list.add(g.krylov, "krylov(c)");
  }

  Mat stacked(n * n, n);
  for (int i = 0; i < n; ++i) stacked.middleRows(i * n, n) = sys.Q(i);
  list.add(null_space(stacked, 1e-10 * q_scale(sys)), "null(Q)");

  const std::vector<Vec> dirs = vanishing_directions(sys);
  g.components = vanishing_components(sys, dirs, g.components_truncated);
  for (std::size_t i = 0; i < g.components.size(); ++i) {
    std::ostringstream label;
    label << "vanish#" << i + 1;
    list.add(g.components[i], label.str());
  }

  // Largest L-invariant subspace inside every phi-vanishing candidate.
  const std::vector<Subspace> snapshot = list.items();
  for (const Subspace& s : snapshot) {
    if (!vanishes(sys, s.basis(), kDiscoveryTol)) continue;
    const Mat w = maximal_invariant_subspace(sys.L(), s.basis(), 1e-9 * affine_scale(sys));
    if (w.cols() >= 1 && w.cols() < n) list.add(w, "inv(" + s.label() + ")");
  }
  g.candidates = list.take();
  return g;
}

// Every sampled point of {phi = 0} must sit inside one of the linear
// components; a curved component shows up as uncovered points.
bool variety_is_covered(const QuadraticSystem& sys, const std::vector<Mat>& comps) {
  constexpr int kSamples = 10000;
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = sys.n();
  const double scale = q_scale(sys);
  for (int k = 0; k < kSamples; ++k) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    v = polish_direction(sys, v.normalized());
    if (eval_nonlinearity(sys, v).norm() >= kDiscoveryTol * scale) continue;
    bool covered = false;
    for (const Mat& c : comps) {
      if (distance_to_span(c, v) <= 1e-6) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

}  // namespace

double phi_restriction_residual(const QuadraticSystem& sys, const Subspace& v) {
  require_match(sys, v);
  double worst = 0.0;
  for (const Mat& q : sys.Qs()) {
    worst = std::max(worst, (v.basis().transpose() * q * v.basis()).cwiseAbs().maxCoeff());
  }
  return worst;
}

bool phi_vanishes_on(const QuadraticSystem& sys, const Subspace& v, double tol) {
  return phi_restriction_residual(sys, v) <= tol * q_scale(sys);
}

CandidateCheck check_candidate(const QuadraticSystem& sys, const Subspace& v) {
  require_match(sys, v);
  CandidateCheck out{v, false, false, 0.0, 0.0, Vec(), {}};
  out.phi_residual = phi_restriction_residual(sys, v);
  out.phi_vanishes = out.phi_residual <= kVerifyTol * q_scale(sys);

  const double tol = kVerifyTol * affine_scale(sys);
  const Mat& b = v.basis();
  out.invariance_residual = distance_to_span(b, sys.c());
  if (out.invariance_residual > tol) {
    out.escaping_image = sys.c();
    out.escaping_label = "c";
  }
  for (int j = 0; j < v.k(); ++j) {
    const Vec image = sys.L() * b.col(j);
    const double d = distance_to_span(b, image);
    if (d > tol && out.escaping_label.empty()) {
      out.escaping_image = image;
      std::ostringstream label;
      label << "L b" << j + 1;
      out.escaping_label = label.str();
    }
    out.invariance_residual = std::max(out.invariance_residual, d);
  }
  out.invariant = out.invariance_residual <= tol;
  return out;
}

bool affine_invariant_on(const QuadraticSystem& sys, const Subspace& v, double tol) {
  require_match(sys, v);
  const double scaled = tol * affine_scale(sys);
  const Mat& b = v.basis();
  if (distance_to_span(b, sys.c()) > scaled) return false;
  for (int j = 0; j < v.k(); ++j) {
    if (distance_to_span(b, sys.L() * b.col(j)) > scaled) return false;
  }
  return true;
}

bool is_ineffectiveness_witness(const QuadraticSystem& sys, const Subspace& v, double tol) {
  return phi_vanishes_on(sys, v, tol) && affine_invariant_on(sys, v, tol);
}

std::vector<Vec> vanishing_directions(const QuadraticSystem& sys) {
  const int n = sys.n();
  std::vector<Vec> out;
  if (n < 2) return out;
  const double scale = q_scale(sys);
  for (const Vec& start : sphere_samples(n, 360 * n, 0x9e3779b97f4a7c15ULL)) {
    Vec v = polish_direction(sys, start);
    if (!v.allFinite()) continue;
    if (eval_nonlinearity(sys, v).norm() >= kDiscoveryTol * scale) continue;
    // Canonical sign: first significant entry positive.
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-8) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    bool dup = false;
    for (const Vec& w : out) {
      if (parallel_up_to_sign(v, w, 1e-6)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(v);
  }
  return out;
}

Mat maximal_invariant_subspace(const Mat& l, const Mat& basis, double tol) {
  const Eigen::Index n = l.rows();
  Mat w = orthonormal_basis(basis, 1e-10);
  for (int it = 0; it <= n && w.cols() > 0; ++it) {
    const Mat proj = Mat::Identity(n, n) - w * w.transpose();
    const Mat leak = proj * l * w;
    const Mat keep = null_space(leak, tol);
    if (keep.cols() == w.cols()) return w;
    if (keep.cols() == 0) return Mat(n, 0);
    w = orthonormal_basis(w * keep, 1e-10);
  }
  return w;
}

std::vector<Subspace> generate_candidates(const QuadraticSystem& sys) {
  return generate(sys).candidates;
}

EffectivenessVerdict check_effective(const QuadraticSystem& sys) {
  EffectivenessVerdict out;
  const int n = sys.n();
  if (n < 2) {
    out.result = Effectiveness::Effective;
    out.exhaustiveness = "n = 1 has no proper nontrivial subspace";
    return out;
  }
  Generated g = generate(sys);
  for (const Subspace& s : g.candidates) {
    CandidateCheck chk = check_candidate(sys, s);
    const bool witness = chk.phi_vanishes && chk.invariant;
    out.candidates_checked.push_back(std::move(chk));
    if (witness && !out.witness) out.witness = s;
  }
  if (out.witness) {
    out.result = Effectiveness::Ineffective;
    out.exhaustiveness = "witness found";
    return out;
  }

  // Any witness is L-invariant and contains c, hence contains krylov(c).
  if (sys.c().norm() > 0.0) {
    const Mat& k = g.krylov;
    if (k.cols() >= n || !vanishes(sys, k, kVerifyTol)) {
      out.result = Effectiveness::Effective;
      out.exhaustiveness =
          "krylov(c): every witness contains span{c, Lc, ...}, which is the whole space or "
          "not phi-vanishing";
      return out;
    }
  }
  // With distinct eigenvalues the real invariant subspaces are exactly the
  // sums of eigen-blocks, and all of them were checked.
  if (g.simple_spectrum && g.block_count <= kMaxBlocksForSums) {
    out.result = Effectiveness::Effective;
    out.exhaustiveness = "simple spectrum: all invariant subspaces of L enumerated";
    return out;
  }
  if (n <= 3 && !g.components_truncated && variety_is_covered(sys, g.components)) {
    out.result = Effectiveness::Effective;
    out.exhaustiveness =
        "sampled: {phi = 0} lies in the listed linear components and each component's "
        "largest invariant subspace was checked";
    return out;
  }
  out.result = Effectiveness::Unknown;
  out.exhaustiveness = "candidate list not provably exhaustive";
  return out;
}

}  // namespace epq
