#pragma once

// Finite-dimensional C*-algebras modeled as direct sums of full matrix
// blocks M_{n_1} + ... + M_{n_m}, with ideals (block subsets), block-routing
// *-homomorphisms, quotients, pullbacks, and the decomposition of an algebra
// along its maximal commutative ideal.

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/linalg.hpp"
#include "finsler/rng.hpp"

namespace finsler {

class FdAlgebra {
 public:
  /// The zero algebra (no blocks).
  FdAlgebra() = default;

  explicit FdAlgebra(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    for (auto d : dims_) {
      if (d == 0) throw Error(ErrorKind::ConfigInvalid, "block dimension must be positive");
    }
  }

  static FdAlgebra zero() { return {}; }
  static FdAlgebra commutative(std::size_t points) {
    return FdAlgebra(std::vector<std::size_t>(points, 1));
  }

  const std::vector<std::size_t>& dims() const& { return dims_; }
  std::vector<std::size_t> dims() && { return std::move(dims_); }
  std::size_t num_blocks() const { return dims_.size(); }
  std::size_t dim(std::size_t block) const { return dims_.at(block); }
  bool is_zero() const { return dims_.empty(); }
  bool is_commutative() const {
    return std::all_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 1; });
  }
  /// Sum of block sizes (size of the defining block-diagonal representation).
  std::size_t matrix_size() const {
    std::size_t s = 0;
    for (auto d : dims_) s += d;
    return s;
  }
  /// Complex vector-space dimension, sum of n_k^2.
  std::size_t dimension() const {
    std::size_t s = 0;
    for (auto d : dims_) s += d * d;
    return s;
  }

  std::string to_string() const {
    if (dims_.empty()) return "0";
    std::string s;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (k) s += "+";
      s += dims_[k] == 1 ? std::string("C") : "M" + std::to_string(dims_[k]);
    }
    return s;
  }

  friend bool operator==(const FdAlgebra&, const FdAlgebra&) = default;

 private:
  std::vector<std::size_t> dims_;
};

class AlgElement {
 public:
  AlgElement() = default;

  AlgElement(FdAlgebra algebra, std::vector<CMatrix> blocks)
      : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
    if (blocks_.size() != algebra_.num_blocks()) {
      throw Error(ErrorKind::ShapeMismatch, "block count does not match algebra");
    }
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto n = algebra_.dim(k);
      if (blocks_[k].rows() != n || blocks_[k].cols() != n) {
        throw Error(ErrorKind::ShapeMismatch, "block " + std::to_string(k) + " has wrong shape");
      }
    }
  }

  static AlgElement zero(const FdAlgebra& a) {
    std::vector<CMatrix> blocks;
    for (auto d : a.dims()) blocks.emplace_back(d, d);
    return {a, std::move(blocks)};
  }

  static AlgElement identity(const FdAlgebra& a) {
    std::vector<CMatrix> blocks;
    for (auto d : a.dims()) blocks.push_back(CMatrix::identity(d));
    return {a, std::move(blocks)};
  }

  /// Central element sum_k scalars[k] 1_k.
  static AlgElement central(const FdAlgebra& a, const std::vector<cplx>& scalars) {
    if (scalars.size() != a.num_blocks()) {
      throw Error(ErrorKind::ShapeMismatch, "one scalar per block required");
    }
    std::vector<CMatrix> blocks;
    for (std::size_t k = 0; k < a.num_blocks(); ++k)
      blocks.push_back(CMatrix::identity(a.dim(k)) * scalars[k]);
    return {a, std::move(blocks)};
  }

  /// Element equal to m in block k and zero elsewhere.
  static AlgElement in_block(const FdAlgebra& a, std::size_t k, const CMatrix& m) {
    auto x = zero(a);
    x.block(k) = m;
    if (m.rows() != a.dim(k) || m.cols() != a.dim(k)) {
      throw Error(ErrorKind::ShapeMismatch, "block matrix has wrong shape");
    }
    return x;
  }

  const FdAlgebra& algebra() const { return algebra_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<CMatrix>& blocks() const& { return blocks_; }
  std::vector<CMatrix> blocks() && { return std::move(blocks_); }
  const CMatrix& block(std::size_t k) const { return blocks_.at(k); }
  CMatrix& block(std::size_t k) { return blocks_.at(k); }

  AlgElement& operator+=(const AlgElement& o) {
    require_same_algebra(o);
    for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += o.blocks_[k];
    return *this;
  }
  AlgElement& operator-=(const AlgElement& o) {
    require_same_algebra(o);
    for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= o.blocks_[k];
    return *this;
  }
  AlgElement& operator*=(cplx s) {
    for (auto& b : blocks_) b *= s;
    return *this;
  }

  friend AlgElement operator+(AlgElement x, const AlgElement& y) { return x += y; }
  friend AlgElement operator-(AlgElement x, const AlgElement& y) { return x -= y; }
  friend AlgElement operator-(AlgElement x) { return x *= -1.0; }
  friend AlgElement operator*(cplx s, AlgElement x) { return x *= s; }
  friend AlgElement operator*(AlgElement x, cplx s) { return x *= s; }

  friend AlgElement operator*(const AlgElement& x, const AlgElement& y) {
    x.require_same_algebra(y);
    std::vector<CMatrix> blocks;
    blocks.reserve(x.blocks_.size());
    for (std::size_t k = 0; k < x.blocks_.size(); ++k) blocks.push_back(x.blocks_[k] * y.blocks_[k]);
    return {x.algebra_, std::move(blocks)};
  }

  void require_same_algebra(const AlgElement& o) const {
    if (!(algebra_ == o.algebra_)) {
      throw Error(ErrorKind::AlgebraMismatch,
                  algebra_.to_string() + " vs " + o.algebra_.to_string());
    }
  }

 private:
  FdAlgebra algebra_;
  std::vector<CMatrix> blocks_;
};

inline AlgElement adjoint(const AlgElement& x) {
  std::vector<CMatrix> blocks;
  for (const auto& b : x.blocks()) blocks.push_back(b.adjoint());
  return {x.algebra(), std::move(blocks)};
}

/// C*-norm of a direct sum: max of blockwise operator norms.
inline double norm(const AlgElement& x) {
  double n = 0.0;
  for (const auto& b : x.blocks()) n = std::max(n, op_norm(b));
  return n;
}

/// Blockwise Frobenius distance, used for residuals.
inline double frobenius(const AlgElement& x) {
  double s = 0.0;
  for (const auto& b : x.blocks()) s += b.frobenius() * b.frobenius();
  return std::sqrt(s);
}

struct PositivityResult {
  bool positive = true;
  std::optional<std::size_t> block;  // offending block when not positive
  double eigenvalue = 0.0;           // its minimal eigenvalue
  bool hermitian = true;
  explicit operator bool() const { return positive; }
};

inline PositivityResult is_positive(const AlgElement& x) {
  const double n = norm(x);
  const double tol = 1e-9 * (1.0 + n);
  for (std::size_t k = 0; k < x.num_blocks(); ++k) {
    const auto& b = x.block(k);
    if (!is_hermitian(b)) return {false, k, 0.0, false};
    const double lambda_min = herm_eig(b).values.back();
    if (lambda_min < -tol) return {false, k, lambda_min, true};
  }
  return {};
}

inline AlgElement sqrt_pos(const AlgElement& x) {
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < x.num_blocks(); ++k) {
    try {
      blocks.push_back(psd_sqrt(x.block(k)));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NotPSD || e.kind() == ErrorKind::NotHermitian) {
        throw Error(ErrorKind::NotPositive, "block " + std::to_string(k) + ": " + e.what());
      }
      throw;
    }
  }
  return {x.algebra(), std::move(blocks)};
}

/// |x| = (x x*)^{1/2} blockwise.
inline AlgElement abs_elem(const AlgElement& x) {
  std::vector<CMatrix> blocks;
  for (const auto& b : x.blocks()) blocks.push_back(abs_matrix(b));
  return {x.algebra(), std::move(blocks)};
}

/// True iff every block is a scalar multiple of the identity.
inline bool is_central(const AlgElement& x, double tol = 1e-10) {
  for (const auto& b : x.blocks()) {
    const cplx lambda = b.trace() / static_cast<double>(b.rows());
    const CMatrix diff = b - CMatrix::identity(b.rows()) * lambda;
    if (diff.max_abs() > tol * std::max(1.0, b.max_abs())) return false;
  }
  return true;
}

/// Closed two-sided ideal of a block algebra: the sum of a subset of blocks.
class Ideal {
 public:
  Ideal() = default;
  Ideal(FdAlgebra algebra, std::vector<std::size_t> blocks)
      : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
    std::sort(blocks_.begin(), blocks_.end());
    if (std::adjacent_find(blocks_.begin(), blocks_.end()) != blocks_.end()) {
      throw Error(ErrorKind::InvalidIdeal, "repeated block index");
    }
    for (auto k : blocks_) {
      if (k >= algebra_.num_blocks()) {
        throw Error(ErrorKind::InvalidIdeal, "block index " + std::to_string(k) + " out of range");
      }
    }
  }

  static Ideal zero(const FdAlgebra& a) { return {a, {}}; }
  static Ideal whole(const FdAlgebra& a) {
    std::vector<std::size_t> all(a.num_blocks());
    std::iota(all.begin(), all.end(), 0);
    return {a, std::move(all)};
  }

  const FdAlgebra& algebra() const { return algebra_; }
  const std::vector<std::size_t>& blocks() const& { return blocks_; }
  std::vector<std::size_t> blocks() && { return std::move(blocks_); }
  bool contains(std::size_t k) const { return std::binary_search(blocks_.begin(), blocks_.end(), k); }
  bool is_zero() const { return blocks_.empty(); }
  bool is_whole() const { return blocks_.size() == algebra_.num_blocks(); }
  bool is_commutative() const {
    return std::all_of(blocks_.begin(), blocks_.end(),
                       [&](std::size_t k) { return algebra_.dim(k) == 1; });
  }

  Ideal complement() const {
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < algebra_.num_blocks(); ++k)
      if (!contains(k)) rest.push_back(k);
    return {algebra_, std::move(rest)};
  }

  friend Ideal operator+(const Ideal& a, const Ideal& b) {
    a.require_same_algebra(b);
    std::vector<std::size_t> u;
    std::set_union(a.blocks_.begin(), a.blocks_.end(), b.blocks_.begin(), b.blocks_.end(),
                   std::back_inserter(u));
    return {a.algebra_, std::move(u)};
  }

  friend Ideal intersect(const Ideal& a, const Ideal& b) {
    a.require_same_algebra(b);
    std::vector<std::size_t> v;
    std::set_intersection(a.blocks_.begin(), a.blocks_.end(), b.blocks_.begin(), b.blocks_.end(),
                          std::back_inserter(v));
    return {a.algebra_, std::move(v)};
  }

  bool subset_of(const Ideal& o) const {
    return std::includes(o.blocks_.begin(), o.blocks_.end(), blocks_.begin(), blocks_.end());
  }

  /// Identity of the ideal: 1 on its blocks, 0 elsewhere.
  AlgElement unit() const {
    auto e = AlgElement::zero(algebra_);
    for (auto k : blocks_) e.block(k) = CMatrix::identity(algebra_.dim(k));
    return e;
  }

  bool contains(const AlgElement& x, double tol = 1e-10) const {
    for (std::size_t k = 0; k < x.num_blocks(); ++k)
      if (!contains(k) && x.block(k).max_abs() > tol) return false;
    return true;
  }

  friend bool operator==(const Ideal&, const Ideal&) = default;

 private:
  void require_same_algebra(const Ideal& o) const {
    if (!(algebra_ == o.algebra_)) throw Error(ErrorKind::AlgebraMismatch, "ideals of different algebras");
  }

  FdAlgebra algebra_;
  std::vector<std::size_t> blocks_;
};

/// *-homomorphism in block-routing form: target block j is U_j a_{from_j} U_j*.
class StarHom {
 public:
  struct Route {
    std::size_t from = 0;
    CMatrix conjugator;
  };

  StarHom() = default;
  StarHom(FdAlgebra source, FdAlgebra target, std::vector<Route> routes)
      : source_(std::move(source)), target_(std::move(target)), routes_(std::move(routes)) {
    if (routes_.size() != target_.num_blocks()) {
      throw Error(ErrorKind::InvalidHom, "one route per target block required");
    }
    for (std::size_t j = 0; j < routes_.size(); ++j) {
      auto& r = routes_[j];
      if (r.from >= source_.num_blocks()) throw Error(ErrorKind::InvalidHom, "route source out of range");
      const auto n = target_.dim(j);
      if (source_.dim(r.from) != n) {
        throw Error(ErrorKind::InvalidHom, "routed block dimensions differ at target block " +
                                               std::to_string(j));
      }
      if (r.conjugator.size() == 0) r.conjugator = CMatrix::identity(n);
      if (r.conjugator.rows() != n || !is_unitary(r.conjugator)) {
        throw Error(ErrorKind::InvalidHom, "conjugator of target block " + std::to_string(j) +
                                               " is not unitary");
      }
    }
  }

  static StarHom identity(const FdAlgebra& a) {
    std::vector<Route> routes;
    for (std::size_t k = 0; k < a.num_blocks(); ++k) routes.push_back({k, {}});
    return {a, a, std::move(routes)};
  }

  /// Target block j copies source block from[j] with identity conjugator.
  static StarHom routing(const FdAlgebra& source, const std::vector<std::size_t>& from) {
    std::vector<std::size_t> dims;
    std::vector<Route> routes;
    for (auto s : from) {
      dims.push_back(source.dim(s));
      routes.push_back({s, {}});
    }
    return {source, FdAlgebra(std::move(dims)), std::move(routes)};
  }

  const FdAlgebra& source() const { return source_; }
  const FdAlgebra& target() const { return target_; }
  const std::vector<Route>& routes() const& { return routes_; }
  std::vector<Route> routes() && { return std::move(routes_); }

  AlgElement operator()(const AlgElement& a) const {
    if (!(a.algebra() == source_)) {
      throw Error(ErrorKind::AlgebraMismatch, "hom source is " + source_.to_string() +
                                                  ", element lives in " + a.algebra().to_string());
    }
    std::vector<CMatrix> blocks;
    blocks.reserve(routes_.size());
    for (const auto& r : routes_) blocks.push_back(r.conjugator * a.block(r.from) * r.conjugator.adjoint());
    return {target_, std::move(blocks)};
  }

  /// Surjective iff distinct target blocks come from distinct source blocks.
  bool is_surjective() const {
    std::vector<std::size_t> from;
    for (const auto& r : routes_) from.push_back(r.from);
    std::sort(from.begin(), from.end());
    return std::adjacent_find(from.begin(), from.end()) == from.end();
  }

  bool is_isomorphism() const { return is_surjective() && routes_.size() == source_.num_blocks(); }

  /// Source blocks no target block reads from.
  Ideal kernel() const {
    std::vector<bool> used(source_.num_blocks(), false);
    for (const auto& r : routes_) used[r.from] = true;
    std::vector<std::size_t> ker;
    for (std::size_t k = 0; k < used.size(); ++k)
      if (!used[k]) ker.push_back(k);
    return {source_, std::move(ker)};
  }

  /// Canonical preimage of b: zero on kernel blocks. Requires surjectivity.
  AlgElement lift(const AlgElement& b) const {
    if (!is_surjective()) throw Error(ErrorKind::NotSurjective, "lift needs a surjective hom");
    if (!(b.algebra() == target_)) throw Error(ErrorKind::AlgebraMismatch, "lift of foreign element");
    auto a = AlgElement::zero(source_);
    for (std::size_t j = 0; j < routes_.size(); ++j) {
      const auto& u = routes_[j].conjugator;
      a.block(routes_[j].from) = u.adjoint() * b.block(j) * u;
    }
    return a;
  }

  StarHom inverse() const {
    if (!is_isomorphism()) throw Error(ErrorKind::InvalidHom, "hom is not invertible");
    std::vector<Route> inv(source_.num_blocks());
    for (std::size_t j = 0; j < routes_.size(); ++j) inv[routes_[j].from] = {j, routes_[j].conjugator.adjoint()};
    return {target_, source_, std::move(inv)};
  }

  /// (this o inner)(a) = this(inner(a)).
  StarHom compose(const StarHom& inner) const {
    if (!(inner.target_ == source_)) throw Error(ErrorKind::AlgebraMismatch, "composition mismatch");
    std::vector<Route> routes;
    for (const auto& r : routes_) {
      const auto& ir = inner.routes_[r.from];
      routes.push_back({ir.from, r.conjugator * ir.conjugator});
    }
    return {inner.source_, target_, std::move(routes)};
  }

 private:
  FdAlgebra source_;
  FdAlgebra target_;
  std::vector<Route> routes_;
};

/// The algebra formed by the blocks of `blocks` (in index order).
inline FdAlgebra sub_algebra(const FdAlgebra& a, const std::vector<std::size_t>& blocks) {
  std::vector<std::size_t> dims;
  for (auto k : blocks) dims.push_back(a.dim(k));
  return FdAlgebra(std::move(dims));
}

/// Quotient map A -> A/I onto the complementary blocks.
inline StarHom quotient_hom(const FdAlgebra& a, const Ideal& ideal) {
  if (!(ideal.algebra() == a)) throw Error(ErrorKind::InvalidIdeal, "ideal of a different algebra");
  return StarHom::routing(a, ideal.complement().blocks());
}

/// Multiplicative linear functional: evaluation of a one-dimensional block.
struct CharacterFunctional {
  std::size_t block = 0;
  cplx operator()(const AlgElement& a) const { return a.block(block)(0, 0); }
};

inline std::vector<CharacterFunctional> multiplicative_functionals(const FdAlgebra& a) {
  std::vector<CharacterFunctional> out;
  for (std::size_t k = 0; k < a.num_blocks(); ++k)
    if (a.dim(k) == 1) out.push_back({k});
  return out;
}

/// Intersection of the kernels of the irreducible representations of
/// dimension > 1: exactly the one-dimensional blocks.
inline Ideal maximal_commutative_ideal(const FdAlgebra& a) {
  std::vector<std::size_t> blocks;
  for (std::size_t k = 0; k < a.num_blocks(); ++k)
    if (a.dim(k) == 1) blocks.push_back(k);
  return {a, std::move(blocks)};
}

template <class R>
AlgElement random_element(const FdAlgebra& a, R& rng) {
  std::vector<CMatrix> blocks;
  for (auto d : a.dims()) blocks.push_back(random_gaussian(d, d, rng));
  return {a, std::move(blocks)};
}

/// g g* for Gaussian g.
template <class R>
AlgElement random_positive(const FdAlgebra& a, R& rng) {
  const auto g = random_element(a, rng);
  return g * adjoint(g);
}

template <class R>
AlgElement random_in_ideal(const Ideal& ideal, R& rng) {
  auto x = AlgElement::zero(ideal.algebra());
  for (auto k : ideal.blocks()) x.block(k) = random_gaussian(ideal.algebra().dim(k), ideal.algebra().dim(k), rng);
  return x;
}

struct CommutativeIdealCertificate {
  bool commutative = true;
  bool central = true;
  double max_commutator = 0.0;
  bool contains_every_commutative_ideal = true;
  std::size_t subsets_checked = 0;
};

/// Certifies maximality by brute force: every block subset whose sampled
/// elements commute must lie inside I, and I itself must be central.
inline CommutativeIdealCertificate certify_maximal_commutative_ideal(const FdAlgebra& a, Rng& rng,
                                                                     std::size_t samples = 8) {
  CommutativeIdealCertificate cert;
  const Ideal ideal = maximal_commutative_ideal(a);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = random_in_ideal(ideal, rng);
    const auto y = random_in_ideal(ideal, rng);
    const auto b = random_element(a, rng);
    const double c1 = frobenius(x * y - y * x);
    const double c2 = frobenius(x * b - b * x);
    cert.max_commutator = std::max({cert.max_commutator, c1, c2});
  }
  cert.commutative = cert.central = cert.max_commutator <= 1e-10;
  const std::size_t m = std::min<std::size_t>(a.num_blocks(), 12);
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    std::vector<std::size_t> blocks;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (std::size_t{1} << k)) blocks.push_back(k);
    const Ideal candidate(a, blocks);
    const auto x = random_in_ideal(candidate, rng);
    const auto y = random_in_ideal(candidate, rng);
    const bool commutes = frobenius(x * y - y * x) <= 1e-10 * (1.0 + frobenius(x) * frobenius(y));
    if (commutes && !candidate.subset_of(ideal)) cert.contains_every_commutative_ideal = false;
    ++cert.subsets_checked;
  }
  return cert;
}

/// B1 (+)_D B2 = {(a, b) : phi(a) = psi(b)} for surjective phi, psi.
///
/// The pullback is itself a block algebra. Its intrinsic block order lists the
/// blocks of B1 first, then the blocks of B2 that psi does not route onto D;
/// a routed block of B2 is determined by its partner in B1.
class PullbackAlgebra {
 public:
  PullbackAlgebra() = default;
  PullbackAlgebra(FdAlgebra left, FdAlgebra right, FdAlgebra glue, StarHom phi, StarHom psi)
      : left_(std::move(left)),
        right_(std::move(right)),
        glue_(std::move(glue)),
        phi_(std::move(phi)),
        psi_(std::move(psi)) {
    if (!(phi_.source() == left_) || !(psi_.source() == right_) || !(phi_.target() == glue_) ||
        !(psi_.target() == glue_)) {
      throw Error(ErrorKind::AlgebraMismatch, "pullback homs do not match the algebras");
    }
    if (!phi_.is_surjective() || !psi_.is_surjective()) {
      throw Error(ErrorKind::NotSurjective, "pullback homs must be surjective");
    }
    right_glue_.assign(right_.num_blocks(), kNone);
    for (std::size_t j = 0; j < glue_.num_blocks(); ++j) right_glue_[psi_.routes()[j].from] = j;
    std::vector<std::size_t> dims = left_.dims();
    right_position_.assign(right_.num_blocks(), kNone);
    for (std::size_t s = 0; s < right_.num_blocks(); ++s) {
      if (right_glue_[s] != kNone) continue;
      right_position_[s] = dims.size();
      dims.push_back(right_.dim(s));
    }
    algebra_ = FdAlgebra(std::move(dims));
  }

  const FdAlgebra& left() const { return left_; }
  const FdAlgebra& right() const { return right_; }
  const FdAlgebra& glue() const { return glue_; }
  const StarHom& phi() const { return phi_; }
  const StarHom& psi() const { return psi_; }
  /// The pullback as a block algebra.
  const FdAlgebra& algebra() const { return algebra_; }

  bool contains(const AlgElement& a, const AlgElement& b, double tol = 1e-10) const {
    const double scale = 1.0 + std::max(norm(a), norm(b));
    return frobenius(phi_(a) - psi_(b)) <= tol * scale;
  }

  /// The element (a, b); throws GlueMismatch unless phi(a) = psi(b).
  AlgElement make(const AlgElement& a, const AlgElement& b) const {
    if (!contains(a, b)) throw Error(ErrorKind::GlueMismatch, "phi(a) != psi(b)");
    return join(a, b);
  }

  /// Assembles (a, b) without checking compatibility.
  AlgElement join(const AlgElement& a, const AlgElement& b) const {
    auto x = AlgElement::zero(algebra_);
    for (std::size_t k = 0; k < left_.num_blocks(); ++k) x.block(k) = a.block(k);
    for (std::size_t s = 0; s < right_.num_blocks(); ++s)
      if (right_position_[s] != kNone) x.block(right_position_[s]) = b.block(s);
    return x;
  }

  /// Compatible partner for a: keeps the non-glued blocks of `hint` and
  /// replaces the glued ones by the psi-preimage of phi(a).
  AlgElement solve_right(const AlgElement& a, const AlgElement& hint) const {
    const auto d = phi_(a);
    auto b = hint;
    for (std::size_t j = 0; j < glue_.num_blocks(); ++j) {
      const auto& r = psi_.routes()[j];
      b.block(r.from) = r.conjugator.adjoint() * d.block(j) * r.conjugator;
    }
    return b;
  }

  std::pair<AlgElement, AlgElement> split(const AlgElement& x) const { return {pi_left()(x), pi_right()(x)}; }

  StarHom pi_left() const {
    std::vector<StarHom::Route> routes;
    for (std::size_t k = 0; k < left_.num_blocks(); ++k) routes.push_back({k, {}});
    return {algebra_, left_, std::move(routes)};
  }

  StarHom pi_right() const {
    std::vector<StarHom::Route> routes;
    for (std::size_t s = 0; s < right_.num_blocks(); ++s) {
      const auto j = right_glue_[s];
      if (j == kNone) {
        routes.push_back({right_position_[s], {}});
      } else {
        // b_s = V* U a_t U* V with phi route (t, U) and psi route (s, V).
        const auto& pr = phi_.routes()[j];
        const auto& qr = psi_.routes()[j];
        routes.push_back({pr.from, qr.conjugator.adjoint() * pr.conjugator});
      }
    }
    return {algebra_, right_, std::move(routes)};
  }

  /// ker(pi_left): the unglued blocks of B2.
  Ideal kernel_left() const { return pi_left().kernel(); }
  /// ker(pi_right): the blocks of B1 not routed onto D.
  Ideal kernel_right() const { return pi_right().kernel(); }
  /// ker(phi o pi_left): everything except the glued blocks.
  Ideal kernel_glue() const { return phi_.compose(pi_left()).kernel(); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  FdAlgebra left_, right_, glue_;
  StarHom phi_, psi_;
  FdAlgebra algebra_;
  std::vector<std::size_t> right_glue_;
  std::vector<std::size_t> right_position_;
};

/// A = C(X) (+)_{C(Y)} B along the maximal commutative ideal I.
struct IdealDecomposition {
  Ideal commutative_ideal;          // I: the one-dimensional blocks
  Ideal complement_ideal;           // J: common kernel of the characters extending those of I
  std::vector<std::size_t> points;  // X = Prim(A/J), as block indices of A
  FdAlgebra quotient;               // B = A/I
  std::vector<std::size_t> glue_points;  // Y = Prim(A/(I+J)); always empty here
  bool disjoint = true;             // I and J intersect in 0
  bool commutative_quotient = true; // A/J is commutative
  PullbackAlgebra pullback;         // C(X) (+)_0 B
  StarHom to_pullback;              // a -> (a + J, a + I), an isomorphism onto the pullback
};

inline IdealDecomposition decompose_ideals(const FdAlgebra& a) {
  IdealDecomposition dec;
  dec.commutative_ideal = maximal_commutative_ideal(a);
  // Each character of I extends to the evaluation of its block on A; J is
  // the intersection of their kernels.
  Ideal j = Ideal::whole(a);
  for (const auto& eps : multiplicative_functionals(a)) {
    std::vector<std::size_t> ker;
    for (std::size_t k = 0; k < a.num_blocks(); ++k)
      if (k != eps.block) ker.push_back(k);
    j = intersect(j, Ideal(a, ker));
  }
  dec.complement_ideal = j;
  dec.disjoint = intersect(dec.commutative_ideal, j).is_zero();
  const auto a_mod_j = quotient_hom(a, j);
  dec.commutative_quotient = a_mod_j.target().is_commutative();
  dec.points = j.complement().blocks();
  const auto a_mod_i = quotient_hom(a, dec.commutative_ideal);
  dec.quotient = a_mod_i.target();
  const Ideal sum = dec.commutative_ideal + j;
  dec.glue_points = sum.complement().blocks();

  const FdAlgebra cx = a_mod_j.target();
  const FdAlgebra y = quotient_hom(a, sum).target();
  // Y is empty in finite dimension, so both glue homs have no routes.
  dec.pullback = PullbackAlgebra(cx, dec.quotient, y, StarHom(cx, y, {}), StarHom(dec.quotient, y, {}));
  std::vector<StarHom::Route> routes;
  for (auto k : dec.points) routes.push_back({k, {}});
  for (auto k : dec.commutative_ideal.complement().blocks()) routes.push_back({k, {}});
  dec.to_pullback = StarHom(a, dec.pullback.algebra(), std::move(routes));
  return dec;
}

}  // namespace finsler
