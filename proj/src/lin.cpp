#include "srbeam/lin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace srbeam::lin {

bool all_finite(const CMat& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

HermView::HermView(const CMat& a, double tol) : tol_(tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "negative Hermitian tolerance");
  if (a.rows() != a.cols())
    throw Error(ErrorCode::DimensionMismatch,
                "Hermitian view of a " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " matrix");
  if (!all_finite(a)) throw Error(ErrorCode::NonFinite, "Hermitian view of non-finite matrix");
  // Tolerance relative to the entry scale, so large-power matrices assembled
  // in floating point are not rejected for rounding.
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (a.size() > 0 && asym > tol * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotHermitian, "max |A - A^H| = " + std::to_string(asym));
  a_ = 0.5 * (a + a.adjoint());
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat vec(const CMat& a) {
  CMat out(a.size(), 1);
  // Eigen storage is column-major, which is exactly column stacking.
  for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(j * a.rows(), 0, a.rows(), 1) = a.col(j);
  return out;
}

CMat unvec(const CMat& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorCode::DimensionMismatch, "unvec: length " + std::to_string(v.size()) +
                                                  " does not match " + std::to_string(rows) + "x" +
                                                  std::to_string(cols));
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = v(j * rows + i);
  return out;
}

double logdet_psd(const HermView& a) {
  const Eigen::LLT<CMat> llt(a.matrix());
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
  const CMat& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "nonpositive Cholesky pivot");
    acc += std::log(d);
  }
  return 2.0 * acc;
}

namespace {

// Phase that makes the first entry with magnitude above `eps` real and
// nonnegative; identity phase when the column is numerically zero.
cplx normalizing_phase(const CVec& col, double eps) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double m = std::abs(col(i));
    if (m > eps) return std::conj(col(i)) / m;
  }
  return {1.0, 0.0};
}

}  // namespace

Svd svd(const CMat& a) {
  if (!all_finite(a)) throw Error(ErrorCode::NonFinite, "svd of non-finite matrix");
  Eigen::JacobiSVD<CMat> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Jacobi SVD");
  Svd out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  constexpr double eps = 1e-12;
  const Eigen::Index k = out.sigma.size();
  for (Eigen::Index c = 0; c < out.U.cols(); ++c) {
    const cplx ph = normalizing_phase(out.U.col(c), eps);
    out.U.col(c) *= ph;
    // u s v^H is unchanged when u and v share the same phase factor.
    if (c < k) out.V.col(c) *= ph;
  }
  for (Eigen::Index c = k; c < out.V.cols(); ++c) out.V.col(c) *= normalizing_phase(out.V.col(c), eps);
  return out;
}

CMat selection_matrix(int i, int n_r, int n_t) {
  if (n_r < 1 || n_t < 1) throw Error(ErrorCode::InvalidArgument, "selection_matrix dimensions");
  if (i < 1 || i > n_t)
    throw Error(ErrorCode::IndexOutOfRange,
                "selection index " + std::to_string(i) + " outside [1, " + std::to_string(n_t) + "]");
  CMat e = CMat::Zero(n_r, static_cast<Eigen::Index>(n_r) * n_t);
  e.block(0, static_cast<Eigen::Index>(i - 1) * n_r, n_r, n_r).setIdentity();
  return e;
}

RMat real_embed_unchecked(const CMat& a) {
  const Eigen::Index n = a.rows(), m = a.cols();
  RMat out(2 * n, 2 * m);
  out.block(0, 0, n, m) = a.real();
  out.block(0, m, n, m) = -a.imag();
  out.block(n, 0, n, m) = a.imag();
  out.block(n, m, n, m) = a.real();
  return out;
}

RMat real_embed(const HermView& a) { return real_embed_unchecked(a.matrix()); }

RVec hermitian_eigenvalues(const HermView& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "Hermitian eigensolver");
  return es.eigenvalues();
}

}  // namespace srbeam::lin
