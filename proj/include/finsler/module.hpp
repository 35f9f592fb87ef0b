#pragma once

// Abstract Finsler A-module: a left A-module E with rho: E -> A_+ such that
// x -> |rho(x)| is a norm and rho(a x)^2 = a rho(x)^2 a*.
//
// Every module in this library is finite-dimensional, and its vectors are
// stored uniformly as a list of matrix "parts" whose shapes the module fixes.
// Vector-space operations act partwise; only the A-action and rho are
// family-specific.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finsler/algebra.hpp"
#include "finsler/json_io.hpp"
#include "finsler/rng.hpp"

namespace finsler {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct ModuleVector {
  std::vector<CMatrix> parts;

  static ModuleVector zeros(const std::vector<Shape>& shape) {
    ModuleVector v;
    for (const auto& s : shape) v.parts.emplace_back(s.rows, s.cols);
    return v;
  }

  std::size_t flat_size() const {
    std::size_t n = 0;
    for (const auto& p : parts) n += p.size();
    return n;
  }

  std::vector<cplx> flatten() const {
    std::vector<cplx> out;
    out.reserve(flat_size());
    for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
    return out;
  }

  static ModuleVector unflatten(const std::vector<Shape>& shape, std::span<const cplx> flat) {
    auto v = zeros(shape);
    std::size_t at = 0;
    for (auto& p : v.parts) {
      if (at + p.size() > flat.size()) throw Error(ErrorKind::ShapeMismatch, "flat vector too short");
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(at),
                flat.begin() + static_cast<std::ptrdiff_t>(at + p.size()), p.data().begin());
      at += p.size();
    }
    if (at != flat.size()) throw Error(ErrorKind::ShapeMismatch, "flat vector too long");
    return v;
  }

  std::vector<Shape> shape() const {
    std::vector<Shape> s;
    for (const auto& p : parts) s.push_back({p.rows(), p.cols()});
    return s;
  }

  ModuleVector& operator+=(const ModuleVector& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i] += o.parts[i];
    return *this;
  }
  ModuleVector& operator-=(const ModuleVector& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i] -= o.parts[i];
    return *this;
  }
  ModuleVector& operator*=(cplx s) {
    for (auto& p : parts) p *= s;
    return *this;
  }

  friend ModuleVector operator+(ModuleVector x, const ModuleVector& y) { return x += y; }
  friend ModuleVector operator-(ModuleVector x, const ModuleVector& y) { return x -= y; }
  friend ModuleVector operator*(cplx s, ModuleVector x) { return x *= s; }
  friend ModuleVector operator*(ModuleVector x, cplx s) { return x *= s; }

  void require_same_shape(const ModuleVector& o) const {
    if (parts.size() != o.parts.size()) throw Error(ErrorKind::ShapeMismatch, "vector part counts differ");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].rows() != o.parts[i].rows() || parts[i].cols() != o.parts[i].cols()) {
        throw Error(ErrorKind::ShapeMismatch, "vector part shapes differ");
      }
    }
  }
};

inline json vector_to_json(const ModuleVector& v) {
  json parts = json::array();
  for (const auto& p : v.parts) parts.push_back(json{{"rows", p.rows()}, {"cols", p.cols()}, {"data", matrix_to_json(p)}});
  return json{{"parts", parts}};
}

inline ModuleVector vector_from_json(const json& j) {
  ModuleVector v;
  for (const auto& p : require_field(j, "parts", "vector")) {
    const auto cols = require_field(p, "cols", "vector.parts[]").get<std::size_t>();
    auto m = matrix_from_json(require_field(p, "data", "vector.parts[]"), cols);
    if (m.rows() != require_field(p, "rows", "vector.parts[]").get<std::size_t>()) {
      throw Error(ErrorKind::ConfigInvalid, "vector part row count mismatch");
    }
    v.parts.push_back(std::move(m));
  }
  return v;
}

class FinslerModule {
 public:
  virtual ~FinslerModule() = default;

  virtual const FdAlgebra& base() const = 0;
  virtual std::vector<Shape> shape() const = 0;
  virtual ModuleVector act(const AlgElement& a, const ModuleVector& x) const = 0;
  virtual AlgElement rho_squared(const ModuleVector& x) const = 0;
  virtual std::string family() const = 0;
  virtual json describe() const = 0;

  virtual AlgElement rho(const ModuleVector& x) const { return sqrt_pos(rho_squared(x)); }

  /// Componentwise standard complex Gaussian; families with constraints override.
  virtual ModuleVector random_vector(Rng& rng) const {
    auto v = ModuleVector::zeros(shape());
    for (auto& p : v.parts)
      for (auto& z : p.data()) z = rng.complex_normal();
    return v;
  }

  /// ||x||_E = ||rho(x)||, evaluated as sqrt ||rho(x)^2|| to avoid a matrix root.
  double norm(const ModuleVector& x) const { return std::sqrt(finsler::norm(rho_squared(x))); }

  ModuleVector zero() const { return ModuleVector::zeros(shape()); }

  std::size_t flat_dim() const {
    std::size_t n = 0;
    for (const auto& s : shape()) n += s.rows * s.cols;
    return n;
  }

  void require_vector(const ModuleVector& x) const {
    if (!(x.shape() == shape())) throw Error(ErrorKind::ShapeMismatch, family() + " vector has wrong shape");
  }

  void require_base(const AlgElement& a) const {
    if (!(a.algebra() == base())) {
      throw Error(ErrorKind::AlgebraMismatch,
                  family() + " module over " + base().to_string() + " acted on by " + a.algebra().to_string());
    }
  }
};

using ModulePtr = std::shared_ptr<const FinslerModule>;

/// C-linear map between module vector spaces, stored as a matrix on flattened
/// coordinates.
class LinearMap {
 public:
  LinearMap() = default;
  LinearMap(std::vector<Shape> in, std::vector<Shape> out, CMatrix matrix)
      : in_(std::move(in)), out_(std::move(out)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != flat(out_) || matrix_.cols() != flat(in_)) {
      throw Error(ErrorKind::ShapeMismatch, "linear map matrix does not match shapes");
    }
  }

  /// Materializes a linear function by evaluating it on basis vectors.
  static LinearMap from_function(const std::vector<Shape>& in, const std::vector<Shape>& out,
                                 const std::function<ModuleVector(const ModuleVector&)>& f) {
    const std::size_t n = flat(in);
    CMatrix m(flat(out), n);
    std::vector<cplx> e(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      e[c] = 1.0;
      const auto image = f(ModuleVector::unflatten(in, e)).flatten();
      if (image.size() != m.rows()) throw Error(ErrorKind::ShapeMismatch, "map image has wrong size");
      for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = image[r];
      e[c] = 0.0;
    }
    return {in, out, std::move(m)};
  }

  static LinearMap identity(const std::vector<Shape>& shape) {
    return {shape, shape, CMatrix::identity(flat(shape))};
  }

  const std::vector<Shape>& in_shape() const { return in_; }
  const std::vector<Shape>& out_shape() const { return out_; }
  const CMatrix& matrix() const { return matrix_; }

  ModuleVector operator()(const ModuleVector& x) const {
    const auto v = x.flatten();
    if (v.size() != matrix_.cols()) throw Error(ErrorKind::ShapeMismatch, "linear map input size");
    std::vector<cplx> y(matrix_.rows(), 0.0);
    for (std::size_t r = 0; r < matrix_.rows(); ++r)
      for (std::size_t c = 0; c < matrix_.cols(); ++c) y[r] += matrix_(r, c) * v[c];
    return ModuleVector::unflatten(out_, y);
  }

  /// Least-squares right inverse.
  LinearMap pseudo_inverse() const { return {out_, in_, pinv(matrix_)}; }

  static std::size_t flat(const std::vector<Shape>& shape) {
    std::size_t n = 0;
    for (const auto& s : shape) n += s.rows * s.cols;
    return n;
  }

 private:
  std::vector<Shape> in_;
  std::vector<Shape> out_;
  CMatrix matrix_;
};

inline json shape_to_json(const std::vector<Shape>& shape) {
  json out = json::array();
  for (const auto& s : shape) out.push_back(json::array({s.rows, s.cols}));
  return out;
}

}  // namespace finsler
