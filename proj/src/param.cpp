#include "srbeam/param.hpp"

namespace srbeam::param {

namespace {

CMat unit(int rows, int cols, int i, int j, cplx v) {
  CMat e = CMat::Zero(rows, cols);
  e(i, j) = v;
  return e;
}

}  // namespace

HermitianBlock::HermitianBlock(int offset, int n) : offset_(offset), n_(n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Hermitian block dimension");
}

std::vector<BasisElement> HermitianBlock::basis() const {
  std::vector<BasisElement> out;
  out.reserve(size());
  int v = offset_;
  for (int k = 0; k < n_; ++k) out.push_back({v++, unit(n_, n_, k, k, 1.0)});
  const cplx I(0.0, 1.0);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      out.push_back({v++, unit(n_, n_, i, j, 1.0) + unit(n_, n_, j, i, 1.0)});
      out.push_back({v++, unit(n_, n_, i, j, I) + unit(n_, n_, j, i, -I)});
    }
  return out;
}

CMat HermitianBlock::value(const RVec& z) const {
  CMat x(n_, n_);
  int v = offset_;
  for (int k = 0; k < n_; ++k) x(k, k) = z(v++);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      x(i, j) = cplx(z(v), z(v + 1));
      x(j, i) = std::conj(x(i, j));
      v += 2;
    }
  return x;
}

void HermitianBlock::write(const CMat& x, RVec& z) const {
  int v = offset_;
  for (int k = 0; k < n_; ++k) z(v++) = x(k, k).real();
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      const cplx a = 0.5 * (x(i, j) + std::conj(x(j, i)));
      z(v++) = a.real();
      z(v++) = a.imag();
    }
}

ComplexBlock::ComplexBlock(int offset, int rows, int cols) : offset_(offset), rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "complex block dimensions");
}

std::vector<BasisElement> ComplexBlock::basis() const {
  std::vector<BasisElement> out;
  out.reserve(size());
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) {
      out.push_back({re(i, j), unit(rows_, cols_, i, j, 1.0)});
      out.push_back({im(i, j), unit(rows_, cols_, i, j, cplx(0.0, 1.0))});
    }
  return out;
}

CMat ComplexBlock::value(const RVec& z) const {
  CMat x(rows_, cols_);
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) x(i, j) = cplx(z(re(i, j)), z(im(i, j)));
  return x;
}

void ComplexBlock::write(const CMat& x, RVec& z) const {
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) {
      z(re(i, j)) = x(i, j).real();
      z(im(i, j)) = x(i, j).imag();
    }
}

void ComplexBlock::add_real_inner(const CMat& c, double scale, RVec& row) const {
  // Re(conj(c) (x + i y)) = Re(c) x + Im(c) y.
  for (int j = 0; j < cols_; ++j)
    for (int i = 0; i < rows_; ++i) {
      row(re(i, j)) += scale * c(i, j).real();
      row(im(i, j)) += scale * c(i, j).imag();
    }
}

}  // namespace srbeam::param
