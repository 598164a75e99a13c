#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace epq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest absolute entry of A - A^T.
double asymmetry(const Mat& a);

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are sorted ascending; column k of `vectors` pairs with
/// `values(k)`.
struct SymEigen {
  Vec values;
  Mat vectors;
  int sweeps = 0;
};

/// Throws Error(NotSymmetric) when asymmetry exceeds 1e-12 * max(1, |S|max).
SymEigen jacobi_eigen(const Mat& s);

struct TopEigen {
  double value = 0.0;
  Vec vector;
  /// lambda_1 - lambda_2; +inf for 1x1 input.
  double gap = 0.0;
};

TopEigen lambda_max_sym(const Mat& s);

/// Orthonormal basis for the column span of `a`, rank decided relative to
/// the largest column norm.
Mat orthonormal_basis(const Mat& a, double rel_tol = 1e-10);

/// Orthonormal basis of the null space of `a` (columns); singular values at
/// or below `abs_tol` count as zero.
Mat null_space(const Mat& a, double abs_tol);

/// Distance of v from span(basis) where basis has orthonormal columns.
double distance_to_span(const Mat& basis, const Vec& v);

}  // namespace epq
