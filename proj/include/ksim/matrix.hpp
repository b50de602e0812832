// Dense complex matrices and amplitude vectors for the small (dim 2 and 4)
// Hilbert spaces used throughout the library. Everything is exact double
// arithmetic with a single global tolerance.

#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksim {

using cplx = std::complex<double>;

// Global numeric tolerance for every algebraic identity in the library.
inline constexpr double kTol = 1e-12;

inline bool is_finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Square, row-major complex matrix.
class Matrix {
 public:
  Matrix() = default;

  explicit Matrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim) {
    if (dim <= 0) throw std::invalid_argument("Matrix: dimension must be positive");
  }

  static Matrix identity(int dim) {
    Matrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static Matrix zero(int dim) { return Matrix(dim); }

  static Matrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const int dim = static_cast<int>(rows.size());
    Matrix m(dim);
    int r = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != dim)
        throw std::invalid_argument("Matrix: rows must form a square grid");
      int c = 0;
      for (cplx v : row) m.at(r, c++) = v;
      ++r;
    }
    return m;
  }

  int dim() const { return dim_; }

  cplx& at(int r, int c) { return a_[static_cast<std::size_t>(r) * dim_ + c]; }
  const cplx& at(int r, int c) const { return a_[static_cast<std::size_t>(r) * dim_ + c]; }

  Matrix operator+(const Matrix& o) const {
    require_same_dim(o);
    Matrix m(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] + o.a_[i];
    return m;
  }

  Matrix operator-(const Matrix& o) const {
    require_same_dim(o);
    Matrix m(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] - o.a_[i];
    return m;
  }

  Matrix operator*(const Matrix& o) const {
    require_same_dim(o);
    Matrix m(dim_);
    for (int r = 0; r < dim_; ++r)
      for (int k = 0; k < dim_; ++k) {
        const cplx v = at(r, k);
        if (v == cplx{}) continue;
        for (int c = 0; c < dim_; ++c) m.at(r, c) += v * o.at(k, c);
      }
    return m;
  }

  Matrix operator*(cplx s) const {
    Matrix m(dim_);
    for (std::size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] * s;
    return m;
  }

  Matrix adjoint() const {
    Matrix m(dim_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) m.at(r, c) = std::conj(at(c, r));
    return m;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < dim_; ++i) t += at(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  std::vector<cplx> apply(const std::vector<cplx>& v) const {
    if (static_cast<int>(v.size()) != dim_)
      throw std::invalid_argument("Matrix: vector dimension mismatch");
    std::vector<cplx> out(static_cast<std::size_t>(dim_));
    for (int r = 0; r < dim_; ++r) {
      cplx acc = 0.0;
      for (int c = 0; c < dim_; ++c) acc += at(r, c) * v[c];
      out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
  }

  bool finite() const {
    for (const cplx& v : a_)
      if (!is_finite(v)) return false;
    return true;
  }

  bool is_hermitian(double tol = kTol) const { return (*this - adjoint()).frobenius_norm() <= tol; }

  bool is_unitary(double tol = kTol) const {
    return (adjoint() * *this - identity(dim_)).frobenius_norm() <= tol;
  }

  bool approx_equal(const Matrix& o, double tol = kTol) const {
    return dim_ == o.dim_ && (*this - o).frobenius_norm() <= tol;
  }

 private:
  void require_same_dim(const Matrix& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("Matrix: dimension mismatch");
  }

  int dim_ = 0;
  std::vector<cplx> a_;
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix m(a.dim() * b.dim());
  for (int ar = 0; ar < a.dim(); ++ar)
    for (int ac = 0; ac < a.dim(); ++ac)
      for (int br = 0; br < b.dim(); ++br)
        for (int bc = 0; bc < b.dim(); ++bc)
          m.at(ar * b.dim() + br, ac * b.dim() + bc) = a.at(ar, ac) * b.at(br, bc);
  return m;
}

// |u><v|
inline Matrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("outer: dimension mismatch");
  Matrix m(static_cast<int>(u.size()));
  for (std::size_t r = 0; r < u.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c)
      m.at(static_cast<int>(r), static_cast<int>(c)) = u[r] * std::conj(v[c]);
  return m;
}

// conj(a) . b
inline cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace ksim
