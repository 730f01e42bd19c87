#pragma once

// Real coordinates for matrix-valued decision variables of the lifted convex
// programs.  Each block owns a contiguous range of the solver's variable vector.

#include <vector>

#include "srbeam/lin.hpp"

namespace srbeam::param {

struct BasisElement {
  int var;
  CMat matrix;
};

/// n x n Hermitian matrix: n real diagonal coordinates, then (Re, Im) of each
/// strictly-upper entry in row-major order.  n*n coordinates in total.
class HermitianBlock {
 public:
  HermitianBlock(int offset, int n);

  int offset() const noexcept { return offset_; }
  int n() const noexcept { return n_; }
  int size() const noexcept { return n_ * n_; }

  std::vector<BasisElement> basis() const;
  CMat value(const RVec& z) const;
  void write(const CMat& x, RVec& z) const;

 private:
  int offset_, n_;
};

/// General complex rows x cols matrix, column-major entries, (Re, Im) pairs.
class ComplexBlock {
 public:
  ComplexBlock(int offset, int rows, int cols);

  int offset() const noexcept { return offset_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int size() const noexcept { return 2 * rows_ * cols_; }
  int re(int i, int j) const noexcept { return offset_ + 2 * (j * rows_ + i); }
  int im(int i, int j) const noexcept { return re(i, j) + 1; }

  /// Basis over C as a real vector space: E_ij for Re, i E_ij for Im.
  std::vector<BasisElement> basis() const;
  CMat value(const RVec& z) const;
  void write(const CMat& x, RVec& z) const;

  /// Coefficients of the real-linear functional  Re tr(C^H X)  in this block's
  /// coordinates.
  void add_real_inner(const CMat& c, double scale, RVec& row) const;

 private:
  int offset_, rows_, cols_;
};

}  // namespace srbeam::param
