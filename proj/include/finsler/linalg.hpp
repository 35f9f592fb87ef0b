#pragma once

// Dense complex matrices and the Hermitian spectral calculus used by every
// algebra operation: cyclic Jacobi eigensolver, PSD square root, operator
// norm and the absolute value |b| = (b b*)^{1/2}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/error.hpp"

namespace finsler {

using cplx = std::complex<double>;

/// Tolerance `rel` scaled by `norm`, never below the absolute floor 1e-12.
inline double scaled_tol(double rel, double norm) { return std::max(rel * norm, 1e-12); }

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorKind::ShapeMismatch, "entry count does not match rows x cols");
    }
  }
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw Error(ErrorKind::ShapeMismatch, "ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static CMatrix zeros(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(std::span<const double> values) {
    CMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  static CMatrix column(std::span<const cplx> values) {
    return CMatrix(values.size(), 1, std::vector<cplx>(values.begin(), values.end()));
  }

  /// u v* for column vectors u, v.
  static CMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
    CMatrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  std::vector<cplx> column_vector(std::size_t j) const {
    std::vector<cplx> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  CMatrix adjoint() const {
    CMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
    return t;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  bool is_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator-(CMatrix a) { return a *= -1.0; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::ShapeMismatch, "matrix product dimensions");
    CMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0.0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  void require_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw Error(ErrorKind::ShapeMismatch, "matrix shapes differ");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

inline void require_finite(const CMatrix& m) {
  if (!m.is_finite()) throw Error(ErrorKind::NonFinite, "matrix has NaN or Inf entries");
}

inline void require_square(const CMatrix& m) {
  if (!m.is_square()) {
    throw Error(ErrorKind::NotSquare,
                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
  }
}

/// Frobenius norm of m - m*.
inline double hermitian_defect(const CMatrix& m) {
  require_square(m);
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s);
}

inline bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12) {
  return m.is_square() && hermitian_defect(m) <= scaled_tol(rel_tol, m.frobenius());
}

inline bool is_unitary(const CMatrix& u, double tol = 1e-10) {
  return u.is_square() && (u.adjoint() * u - CMatrix::identity(u.rows())).frobenius() <= tol;
}

struct EigDecomp {
  std::vector<double> values;  // descending
  CMatrix vectors;             // unitary, column i pairs with values[i]
};

namespace detail {

inline double off_diagonal_frobenius(const CMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p,q); a <- G* a G, v <- v G with
//   G(p,p) = c, G(q,p) = -s conj(e), G(p,q) = s e, G(q,q) = c,  e = a(p,q)/|a(p,q)|.
inline void jacobi_rotate(CMatrix& a, CMatrix& v, std::size_t p, std::size_t q) {
  const cplx apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const cplx e = apq / r;
  const double alpha = a(p, p).real();
  const double beta = a(q, q).real();
  const double tau = (beta - alpha) / (2.0 * r);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const cplx se = s * e;
  const cplx se_bar = s * std::conj(e);
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    const cplx akp = a(k, p);
    const cplx akq = a(k, q);
    a(k, p) = c * akp - se_bar * akq;
    a(k, q) = se * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const cplx apk = a(p, k);
    const cplx aqk = a(q, k);
    a(p, k) = c * apk - se * aqk;
    a(q, k) = se_bar * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (std::size_t k = 0; k < v.rows(); ++k) {
    const cplx vkp = v(k, p);
    const cplx vkq = v(k, q);
    v(k, p) = c * vkp - se_bar * vkq;
    v(k, q) = se * vkp + c * vkq;
  }
}

}  // namespace detail

inline constexpr int kJacobiMaxSweeps = 100;

/// Full spectral decomposition of a Hermitian matrix by cyclic Jacobi sweeps.
/// Eigenvalues are returned in descending order.
inline EigDecomp herm_eig(const CMatrix& m) {
  require_square(m);
  require_finite(m);
  const double scale = m.frobenius();
  if (hermitian_defect(m) > scaled_tol(1e-12, scale)) {
    throw Error(ErrorKind::NotHermitian, "defect " + std::to_string(hermitian_defect(m)));
  }
  const std::size_t n = m.rows();
  CMatrix a = (m + m.adjoint()) * 0.5;
  CMatrix v = CMatrix::identity(n);
  const double threshold = 1e-13 * scale;

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (detail::off_diagonal_frobenius(a) <= threshold) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
  }
  if (!converged && detail::off_diagonal_frobenius(a) > threshold) {
    throw Error(ErrorKind::NoConvergence, "Jacobi sweeps exhausted");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });
  EigDecomp out{std::vector<double>(n), CMatrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

/// V diag(f(lambda)) V* for a decomposition V diag(lambda) V*.
inline CMatrix spectral_apply(const EigDecomp& eig, const std::function<double(double)>& f) {
  const std::size_t n = eig.values.size();
  CMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = eig.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return (out + out.adjoint()) * 0.5;
}

/// Largest singular value. Hermitian inputs use max |eigenvalue| directly.
inline double op_norm(const CMatrix& m) {
  require_finite(m);
  if (m.size() == 0) return 0.0;
  if (is_hermitian(m)) {
    const auto eig = herm_eig(m);
    return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  }
  const CMatrix gram = m.cols() <= m.rows() ? m.adjoint() * m : m * m.adjoint();
  return std::sqrt(std::max(0.0, herm_eig(gram).values.front()));
}

/// Hermitian PSD square root. Eigenvalues in [-1e-9 |m|, 0) are clamped to zero;
/// eigenvalues at roundoff level (8 n eps |m|) are treated as zero as well.
inline CMatrix psd_sqrt(const CMatrix& m) {
  const auto eig = herm_eig(m);
  if (eig.values.empty()) return m;
  const double norm = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  if (eig.values.back() < -scaled_tol(1e-9, norm)) {
    throw Error(ErrorKind::NotPSD, "min eigenvalue " + std::to_string(eig.values.back()));
  }
  const double noise = 8.0 * static_cast<double>(m.rows()) *
                       std::numeric_limits<double>::epsilon() * norm;
  return spectral_apply(eig, [noise](double x) { return x <= noise ? 0.0 : std::sqrt(x); });
}

/// |m| = (m m*)^{1/2}.
inline CMatrix abs_matrix(const CMatrix& m) {
  require_square(m);
  return psd_sqrt(m * m.adjoint());
}

/// Moore-Penrose pseudo-inverse via the Hermitian eigensystem of m m*.
inline CMatrix pinv(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return CMatrix(m.cols(), m.rows());
  const auto eig = herm_eig(m * m.adjoint());
  const double cutoff = 1e-12 * std::max(eig.values.front(), 0.0);
  const CMatrix inv =
      spectral_apply(eig, [cutoff](double x) { return x > cutoff && x > 0.0 ? 1.0 / x : 0.0; });
  return m.adjoint() * inv;
}

/// A Haar-ish unitary: eigenvectors of a random Hermitian matrix.
template <class Rng>
CMatrix random_unitary(std::size_t n, Rng& rng) {
  CMatrix g(n, n);
  for (auto& z : g.data()) z = rng.complex_normal();
  return herm_eig(g + g.adjoint()).vectors;
}

template <class Rng>
CMatrix random_gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (auto& z : g.data()) z = rng.complex_normal();
  return g;
}

}  // namespace finsler
