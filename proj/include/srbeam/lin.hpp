#pragma once

// Dense complex linear algebra on small matrices, plus the structural
// constructions (vec, Kronecker, selection blocks, real embedding) used by the
// rate model and the lifted convex programs.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "srbeam/errors.hpp"

namespace srbeam {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

namespace lin {

inline constexpr double kHermitianTol = 1e-9;

bool all_finite(const CMat& a);

/// A matrix that has been checked to be Hermitian within `tol` (max entrywise
/// |A - A^H|).  The stored matrix is symmetrized on construction.
class HermView {
 public:
  explicit HermView(const CMat& a, double tol = kHermitianTol);

  const CMat& matrix() const noexcept { return a_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }
  double tolerance() const noexcept { return tol_; }

 private:
  CMat a_;
  double tol_;
};

CMat kron(const CMat& a, const CMat& b);

/// Column-stacking vectorization, returned as a (rows*cols) x 1 matrix.
CMat vec(const CMat& a);

/// Inverse of vec for a matrix of the given shape.
CMat unvec(const CMat& v, Eigen::Index rows, Eigen::Index cols);

/// Natural log of det(A) for Hermitian positive definite A, via Cholesky.
/// Throws NotPositiveDefinite when the factorization fails.
double logdet_psd(const HermView& a);

struct Svd {
  CMat U;
  RVec sigma;  // nonincreasing, length min(rows, cols)
  CMat V;      // full square unitary, A = U(:, 0:k) diag(sigma) V(:, 0:k)^H
};

/// Full SVD with a deterministic phase convention: the first nonzero entry of
/// each column of U is real and nonnegative (V columns beyond the rank get the
/// same treatment).
Svd svd(const CMat& a);

/// E_i = [0_{n_r x (i-1) n_r}  I_{n_r}  0_{n_r x (n_t-i) n_r}], 1-based i.
CMat selection_matrix(int i, int n_r, int n_t);

/// [[Re A, -Im A], [Im A, Re A]].
RMat real_embed(const HermView& a);

/// Same embedding without the Hermitian check (used for coefficient blocks
/// that are already known to be Hermitian).
RMat real_embed_unchecked(const CMat& a);

/// Eigenvalues of a Hermitian matrix in ascending order.
RVec hermitian_eigenvalues(const HermView& a);

}  // namespace lin
}  // namespace srbeam
