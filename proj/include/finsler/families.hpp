#pragma once

// Concrete Finsler modules: free Hilbert modules A^n, section modules of
// finite bundles of normed spaces, quotients E/IE, transports along algebra
// isomorphisms, and a deliberately broken candidate used to exercise the
// axiom checkers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "finsler/module.hpp"

namespace finsler {

/// A^n with <x, y> = sum_i x_i y_i* and rho(x) = <x, x>^{1/2}.
class FreeHilbertModule : public FinslerModule {
 public:
  FreeHilbertModule(FdAlgebra algebra, std::size_t rank) : algebra_(std::move(algebra)), rank_(rank) {}

  const FdAlgebra& base() const override { return algebra_; }
  std::size_t rank() const { return rank_; }
  std::string family() const override { return "free"; }

  std::vector<Shape> shape() const override {
    std::vector<Shape> s;
    for (std::size_t i = 0; i < rank_; ++i)
      for (auto d : algebra_.dims()) s.push_back({d, d});
    return s;
  }

  /// Vector with coordinates x_1, ..., x_n.
  ModuleVector make(const std::vector<AlgElement>& coords) const {
    if (coords.size() != rank_) throw Error(ErrorKind::RankMismatch, "expected " + std::to_string(rank_) + " coordinates");
    ModuleVector v;
    for (const auto& c : coords) {
      if (!(c.algebra() == algebra_)) throw Error(ErrorKind::AlgebraMismatch, "coordinate in wrong algebra");
      v.parts.insert(v.parts.end(), c.blocks().begin(), c.blocks().end());
    }
    return v;
  }

  AlgElement coordinate(const ModuleVector& x, std::size_t i) const {
    const std::size_t m = algebra_.num_blocks();
    std::vector<CMatrix> blocks(x.parts.begin() + static_cast<std::ptrdiff_t>(i * m),
                                x.parts.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    return {algebra_, std::move(blocks)};
  }

  ModuleVector act(const AlgElement& a, const ModuleVector& x) const override {
    require_base(a);
    require_vector(x);
    ModuleVector y = x;
    const std::size_t m = algebra_.num_blocks();
    for (std::size_t i = 0; i < rank_; ++i)
      for (std::size_t k = 0; k < m; ++k) y.parts[i * m + k] = a.block(k) * x.parts[i * m + k];
    return y;
  }

  /// Linear in x; <x, a y> = <x, y> a*.
  AlgElement inner(const ModuleVector& x, const ModuleVector& y) const {
    if (!(x.shape() == shape()) || !(y.shape() == shape())) {
      throw Error(ErrorKind::RankMismatch, "inner product of vectors of different rank");
    }
    auto out = AlgElement::zero(algebra_);
    const std::size_t m = algebra_.num_blocks();
    for (std::size_t i = 0; i < rank_; ++i)
      for (std::size_t k = 0; k < m; ++k) out.block(k) += x.parts[i * m + k] * y.parts[i * m + k].adjoint();
    return out;
  }

  AlgElement rho_squared(const ModuleVector& x) const override { return inner(x, x); }

  json describe() const override {
    return json{{"family", family()}, {"algebra", algebra_to_json(algebra_)}, {"rank", rank_}};
  }

 private:
  FdAlgebra algebra_;
  std::size_t rank_;
};

/// Not a Finsler module: rho(x) = ||x||_F 1. It is a Banach module but
/// violates rho(ax)^2 = a rho(x)^2 a*, which the axiom checker must detect.
class FrobeniusScalarCandidate : public FreeHilbertModule {
 public:
  using FreeHilbertModule::FreeHilbertModule;

  std::string family() const override { return "frobenius_scalar"; }

  AlgElement rho_squared(const ModuleVector& x) const override {
    double f2 = 0.0;
    for (const auto& p : x.parts) f2 += p.frobenius() * p.frobenius();
    return AlgElement::identity(base()) * f2;
  }

  AlgElement rho(const ModuleVector& x) const override {
    return AlgElement::identity(base()) * std::sqrt(finsler::norm(rho_squared(x)));
  }
};

/// Weighted l^p norm on C^dim: the l^p norm of (w_i v_i).
struct FiberNorm {
  std::size_t dim = 1;
  double p = 2.0;
  std::vector<double> weights;  // empty means all ones

  static FiberNorm lp(std::size_t dim, double p) { return {dim, p, {}}; }

  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

  void validate() const {
    if (!(p >= 1.0)) throw Error(ErrorKind::ConfigInvalid, "fiber exponent must be >= 1");
    if (!weights.empty() && weights.size() != dim) throw Error(ErrorKind::ConfigInvalid, "one weight per fiber coordinate");
    for (double w : weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::ConfigInvalid, "fiber weights must be positive");
  }

  bool is_euclidean() const { return p == 2.0; }

  /// Squared norm; exact sum of squares in the l^2 case.
  double squared(std::span<const cplx> v) const {
    if (p == 2.0) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += std::norm(weight(i) * v[i]);
      return s;
    }
    const double n = (*this)(v);
    return n * n;
  }

  double operator()(std::span<const cplx> v) const {
    if (std::isinf(p)) {
      double m = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, weight(i) * std::abs(v[i]));
      return m;
    }
    if (p == 2.0) return std::sqrt(squared(v));
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::pow(weight(i) * std::abs(v[i]), p);
    return std::pow(s, 1.0 / p);
  }

  json to_json() const {
    json j{{"dim", dim}, {"p", double_to_json(p)}};
    if (!weights.empty()) j["weights"] = weights;
    return j;
  }

  static FiberNorm from_json(const json& j) {
    FiberNorm f;
    f.dim = require_field(j, "dim", "fiber").get<std::size_t>();
    f.p = j.contains("p") ? double_from_json(j["p"]) : 2.0;
    if (j.contains("weights")) f.weights = j["weights"].get<std::vector<double>>();
    f.validate();
    return f;
  }

  friend bool operator==(const FiberNorm& a, const FiberNorm& b) {
    if (a.dim != b.dim || a.p != b.p) return false;
    for (std::size_t i = 0; i < a.dim; ++i)
      if (a.weight(i) != b.weight(i)) return false;
    return true;
  }
};

/// Sections of a bundle of normed spaces over a finite discrete X, as a
/// module over C(X) = C^X with rho(x)(t) = ||x(t)||_t.
class BundleSectionModule : public FinslerModule {
 public:
  explicit BundleSectionModule(std::vector<FiberNorm> fibers)
      : fibers_(std::move(fibers)), algebra_(FdAlgebra::commutative(fibers_.size())) {
    for (const auto& f : fibers_) f.validate();
  }

  const FdAlgebra& base() const override { return algebra_; }
  const std::vector<FiberNorm>& fibers() const& { return fibers_; }
  std::vector<FiberNorm> fibers() && { return std::move(fibers_); }
  std::string family() const override { return "bundle"; }

  std::vector<Shape> shape() const override {
    std::vector<Shape> s;
    for (const auto& f : fibers_) s.push_back({f.dim, 1});
    return s;
  }

  ModuleVector section(const std::vector<std::vector<cplx>>& values) const {
    if (values.size() != fibers_.size()) throw Error(ErrorKind::ShapeMismatch, "one fiber value per point");
    ModuleVector v;
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (values[t].size() != fibers_[t].dim) throw Error(ErrorKind::ShapeMismatch, "fiber value has wrong dimension");
      v.parts.push_back(CMatrix::column(values[t]));
    }
    return v;
  }

  ModuleVector act(const AlgElement& f, const ModuleVector& x) const override {
    require_base(f);
    require_vector(x);
    ModuleVector y = x;
    for (std::size_t t = 0; t < fibers_.size(); ++t) y.parts[t] *= f.block(t)(0, 0);
    return y;
  }

  double fiber_norm(const ModuleVector& x, std::size_t t) const { return fibers_[t](x.parts[t].data()); }

  AlgElement rho(const ModuleVector& x) const override {
    require_vector(x);
    std::vector<cplx> values;
    for (std::size_t t = 0; t < fibers_.size(); ++t) values.push_back(fiber_norm(x, t));
    return AlgElement::central(algebra_, values);
  }

  AlgElement rho_squared(const ModuleVector& x) const override {
    require_vector(x);
    std::vector<cplx> values;
    for (std::size_t t = 0; t < fibers_.size(); ++t) values.push_back(fibers_[t].squared(x.parts[t].data()));
    return AlgElement::central(algebra_, values);
  }

  json describe() const override {
    json fibers = json::array();
    for (const auto& f : fibers_) fibers.push_back(f.to_json());
    return json{{"family", family()}, {"fibers", fibers}};
  }

 private:
  std::vector<FiberNorm> fibers_;
  FdAlgebra algebra_;
};

/// E/IE over B = A/I with rho' = pi o rho. Vectors are parent vectors read
/// as cosets: x and y are the same element iff rho'(x - y) = 0.
class QuotientModule : public FinslerModule {
 public:
  QuotientModule(ModulePtr parent, Ideal ideal)
      : parent_(std::move(parent)), ideal_(std::move(ideal)) {
    if (!(ideal_.algebra() == parent_->base())) throw Error(ErrorKind::InvalidIdeal, "ideal of a different algebra");
    pi_ = quotient_hom(parent_->base(), ideal_);
  }

  const FdAlgebra& base() const override { return pi_.target(); }
  const ModulePtr& parent() const { return parent_; }
  const Ideal& ideal() const { return ideal_; }
  const StarHom& projection() const { return pi_; }
  std::string family() const override { return "quotient"; }
  std::vector<Shape> shape() const override { return parent_->shape(); }

  ModuleVector act(const AlgElement& b, const ModuleVector& x) const override {
    require_base(b);
    return parent_->act(pi_.lift(b), x);
  }

  AlgElement rho_squared(const ModuleVector& x) const override { return pi_(parent_->rho_squared(x)); }
  AlgElement rho(const ModuleVector& x) const override { return pi_(parent_->rho(x)); }
  ModuleVector random_vector(Rng& rng) const override { return parent_->random_vector(rng); }

  json describe() const override {
    return json{{"family", family()}, {"parent", parent_->describe()}, {"ideal", ideal_to_json(ideal_)}};
  }

 private:
  ModulePtr parent_;
  Ideal ideal_;
  StarHom pi_;
};

/// The module `inner` over A' viewed over A through an isomorphism iso: A -> A'.
class TransportedModule : public FinslerModule {
 public:
  TransportedModule(ModulePtr inner, StarHom iso) : inner_(std::move(inner)), iso_(std::move(iso)) {
    if (!iso_.is_isomorphism()) throw Error(ErrorKind::InvalidHom, "transport needs an isomorphism");
    if (!(iso_.target() == inner_->base())) throw Error(ErrorKind::AlgebraMismatch, "iso target must be the module base");
    inverse_ = iso_.inverse();
  }

  const FdAlgebra& base() const override { return iso_.source(); }
  const ModulePtr& inner() const { return inner_; }
  const StarHom& iso() const { return iso_; }
  std::string family() const override { return "transport"; }
  std::vector<Shape> shape() const override { return inner_->shape(); }

  ModuleVector act(const AlgElement& a, const ModuleVector& x) const override {
    require_base(a);
    return inner_->act(iso_(a), x);
  }
  AlgElement rho_squared(const ModuleVector& x) const override { return inverse_(inner_->rho_squared(x)); }
  AlgElement rho(const ModuleVector& x) const override { return inverse_(inner_->rho(x)); }
  ModuleVector random_vector(Rng& rng) const override { return inner_->random_vector(rng); }

  json describe() const override {
    return json{{"family", family()}, {"module", inner_->describe()}, {"iso", hom_to_json(iso_)}};
  }

 private:
  ModulePtr inner_;
  StarHom iso_;
  StarHom inverse_;
};

/// For a surjective pi: P -> B, the isomorphism B -> P/ker(pi) inverse to the
/// map induced by pi (targets the complement blocks in index order).
inline StarHom induced_inverse(const StarHom& pi) {
  if (!pi.is_surjective()) throw Error(ErrorKind::NotSurjective, "induced inverse needs a surjection");
  const auto keep = pi.kernel().complement().blocks();
  const FdAlgebra quotient = sub_algebra(pi.source(), keep);
  std::vector<StarHom::Route> routes;
  for (auto q : keep) {
    for (std::size_t s = 0; s < pi.routes().size(); ++s) {
      if (pi.routes()[s].from == q) {
        routes.push_back({s, pi.routes()[s].conjugator.adjoint()});
        break;
      }
    }
  }
  return {pi.target(), quotient, std::move(routes)};
}

/// E / ker(pi) E presented as a module over the target of pi.
inline ModulePtr quotient_along(const ModulePtr& e, const StarHom& pi) {
  auto q = std::make_shared<QuotientModule>(e, pi.kernel());
  return std::make_shared<TransportedModule>(q, induced_inverse(pi));
}

}  // namespace finsler
