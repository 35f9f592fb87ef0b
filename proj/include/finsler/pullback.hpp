#pragma once

// Gluing Finsler modules over a pullback algebra B1 (+)_D B2, and the
// canonical decomposition of a module over a pullback into its two
// quotients and their common quotient.

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "finsler/families.hpp"

namespace finsler {

/// F1 (+)_H F2: pairs (x1, x2) with psi1(x1) = psi2(x2) modulo ker rho_H.
/// A vector stores the parts of x1 followed by the parts of x2.
class PullbackModule : public FinslerModule {
 public:
  static constexpr double kMembershipTol = 1e-10;
  static constexpr double kValidationTol = 1e-8;

  PullbackModule(ModulePtr left, ModulePtr right, ModulePtr glue, PullbackAlgebra algebra, LinearMap psi_left,
                 LinearMap psi_right, std::size_t validation_samples = 8)
      : left_(std::move(left)),
        right_(std::move(right)),
        glue_(std::move(glue)),
        algebra_(std::move(algebra)),
        psi_left_(std::move(psi_left)),
        psi_right_(std::move(psi_right)) {
    if (!(left_->base() == algebra_.left()) || !(right_->base() == algebra_.right()) ||
        !(glue_->base() == algebra_.glue())) {
      throw Error(ErrorKind::AlgebraMismatch, "module bases do not match the pullback algebra");
    }
    if (!(psi_left_.in_shape() == left_->shape()) || !(psi_left_.out_shape() == glue_->shape()) ||
        !(psi_right_.in_shape() == right_->shape()) || !(psi_right_.out_shape() == glue_->shape())) {
      throw Error(ErrorKind::NotCompatible, "gluing maps have the wrong shapes");
    }
    left_inverse_ = psi_left_.pseudo_inverse();
    right_inverse_ = psi_right_.pseudo_inverse();
    validate(*left_, psi_left_, left_inverse_, algebra_.phi(), "left", validation_samples);
    validate(*right_, psi_right_, right_inverse_, algebra_.psi(), "right", validation_samples);
    for (const auto& s : left_->shape()) shape_.push_back(s);
    for (const auto& s : right_->shape()) shape_.push_back(s);
  }

  const FdAlgebra& base() const override { return algebra_.algebra(); }
  const PullbackAlgebra& pullback() const { return algebra_; }
  const ModulePtr& left() const { return left_; }
  const ModulePtr& right() const { return right_; }
  const ModulePtr& glue() const { return glue_; }
  const LinearMap& psi_left() const { return psi_left_; }
  const LinearMap& psi_right() const { return psi_right_; }
  std::string family() const override { return "pullback"; }
  std::vector<Shape> shape() const override { return shape_; }

  std::pair<ModuleVector, ModuleVector> split(const ModuleVector& x) const {
    require_vector(x);
    const auto n1 = left_->shape().size();
    ModuleVector x1, x2;
    x1.parts.assign(x.parts.begin(), x.parts.begin() + static_cast<std::ptrdiff_t>(n1));
    x2.parts.assign(x.parts.begin() + static_cast<std::ptrdiff_t>(n1), x.parts.end());
    return {std::move(x1), std::move(x2)};
  }

  ModuleVector join(const ModuleVector& x1, const ModuleVector& x2) const {
    left_->require_vector(x1);
    right_->require_vector(x2);
    ModuleVector x = x1;
    x.parts.insert(x.parts.end(), x2.parts.begin(), x2.parts.end());
    return x;
  }

  /// Squared glue norm of psi1(x1) - psi2(x2).
  double membership_residual(const ModuleVector& x1, const ModuleVector& x2) const {
    return finsler::norm(glue_->rho_squared(psi_left_(x1) - psi_right_(x2)));
  }

  bool contains(const ModuleVector& x) const {
    const auto [x1, x2] = split(x);
    const double scale = 1.0 + finsler::norm(left_->rho_squared(x1)) + finsler::norm(right_->rho_squared(x2));
    return membership_residual(x1, x2) <= kMembershipTol * scale;
  }

  /// The pair (x1, x2); throws GlueMismatch unless it lies in the pullback.
  ModuleVector make(const ModuleVector& x1, const ModuleVector& x2) const {
    auto x = join(x1, x2);
    if (!contains(x)) throw Error(ErrorKind::GlueMismatch, "psi1(x1) and psi2(x2) differ in the glue module");
    return x;
  }

  /// Random x1, its least-squares partner in F2, plus a random vector of ker(psi) F2.
  ModuleVector random_vector(Rng& rng) const override {
    const auto x1 = left_->random_vector(rng);
    auto x2 = right_inverse_(psi_left_(x1));
    const auto kernel_unit = algebra_.psi().kernel().unit();
    x2 += right_->act(kernel_unit, right_->random_vector(rng));
    return join(x1, x2);
  }

  ModuleVector act(const AlgElement& a, const ModuleVector& x) const override {
    require_base(a);
    if (!contains(x)) throw Error(ErrorKind::GlueMismatch, "vector is not in the pullback module");
    const auto [b1, b2] = algebra_.split(a);
    const auto [x1, x2] = split(x);
    return join(left_->act(b1, x1), right_->act(b2, x2));
  }

  AlgElement rho_squared(const ModuleVector& x) const override {
    const auto [x1, x2] = split(x);
    return algebra_.join(left_->rho_squared(x1), right_->rho_squared(x2));
  }

  AlgElement rho(const ModuleVector& x) const override {
    const auto [x1, x2] = split(x);
    return algebra_.join(left_->rho(x1), right_->rho(x2));
  }

  json describe() const override {
    return json{{"family", family()},
                {"left", left_->describe()},
                {"right", right_->describe()},
                {"glue_module", glue_->describe()},
                {"phi", hom_to_json(algebra_.phi())},
                {"psi", hom_to_json(algebra_.psi())},
                {"psi_left", matrix_to_json(psi_left_.matrix())},
                {"psi_right", matrix_to_json(psi_right_.matrix())}};
  }

 private:
  // Sampled certificate that psi induces an isometric module isomorphism
  // F / ker(hom) F -> H.
  void validate(const FinslerModule& f, const LinearMap& psi, const LinearMap& inverse, const StarHom& hom,
                const std::string& side, std::size_t samples) const {
    Rng rng(0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < samples; ++i) {
      const auto x = f.random_vector(rng);
      const auto b = random_element(f.base(), rng);
      const auto rx = f.rho_squared(x);
      const double scale = 1.0 + finsler::norm(rx) * (1.0 + finsler::norm(b) * finsler::norm(b));
      const double isometry = finsler::norm(glue_->rho_squared(psi(x)) - hom(rx));
      if (isometry > kValidationTol * scale) {
        throw Error(ErrorKind::NotCompatible, side + " gluing map is not isometric modulo the kernel (residual " +
                                                  std::to_string(isometry) + ")");
      }
      const auto drift = psi(f.act(b, x)) - glue_->act(hom(b), psi(x));
      if (finsler::norm(glue_->rho_squared(drift)) > kValidationTol * scale) {
        throw Error(ErrorKind::NotCompatible, side + " gluing map is not a module map");
      }
      const auto h = glue_->random_vector(rng);
      const double hs = 1.0 + finsler::norm(glue_->rho_squared(h));
      if (finsler::norm(glue_->rho_squared(psi(inverse(h)) - h)) > kValidationTol * hs) {
        throw Error(ErrorKind::NotCompatible, side + " gluing map is not onto the glue module");
      }
    }
  }

  ModulePtr left_, right_, glue_;
  PullbackAlgebra algebra_;
  LinearMap psi_left_, psi_right_;
  LinearMap left_inverse_, right_inverse_;
  std::vector<Shape> shape_;
};

using PullbackPtr = std::shared_ptr<const PullbackModule>;

/// Canonical gluing map F -> H induced by a surjection phi: B -> D between the
/// bases. Supported: free to free, bundle to bundle, and between bundles
/// and free modules over one-dimensional blocks.
inline LinearMap restriction_map(const FinslerModule& f, const StarHom& phi, const FinslerModule& h) {
  if (!(phi.source() == f.base()) || !(phi.target() == h.base())) {
    throw Error(ErrorKind::AlgebraMismatch, "restriction hom does not match the module bases");
  }
  const auto* ff = dynamic_cast<const FreeHilbertModule*>(&f);
  const auto* fb = dynamic_cast<const BundleSectionModule*>(&f);
  const auto* hf = dynamic_cast<const FreeHilbertModule*>(&h);
  const auto* hb = dynamic_cast<const BundleSectionModule*>(&h);
  const auto& routes = phi.routes();
  const std::size_t m_in = f.base().num_blocks();
  const std::size_t m_out = h.base().num_blocks();
  if (m_out == 0) return {f.shape(), h.shape(), CMatrix(h.flat_dim(), f.flat_dim())};

  if (ff != nullptr && hf != nullptr && ff->family() == "free" && hf->family() == "free") {
    if (ff->rank() != hf->rank()) throw Error(ErrorKind::NotCompatible, "free modules of different rank");
    return LinearMap::from_function(f.shape(), h.shape(), [&](const ModuleVector& x) {
      auto y = h.zero();
      for (std::size_t i = 0; i < hf->rank(); ++i)
        for (std::size_t j = 0; j < m_out; ++j) {
          const auto& u = routes[j].conjugator;
          y.parts[i * m_out + j] = u * x.parts[i * m_in + routes[j].from] * u.adjoint();
        }
      return y;
    });
  }
  if (fb != nullptr && hb != nullptr) {
    for (std::size_t j = 0; j < m_out; ++j) {
      if (!(fb->fibers()[routes[j].from] == hb->fibers()[j])) {
        throw Error(ErrorKind::NotCompatible, "glued fibers carry different norms");
      }
    }
    return LinearMap::from_function(f.shape(), h.shape(), [&](const ModuleVector& x) {
      auto y = h.zero();
      for (std::size_t j = 0; j < m_out; ++j) y.parts[j] = x.parts[routes[j].from];
      return y;
    });
  }
  if (fb != nullptr && hf != nullptr && hf->family() == "free") {
    for (std::size_t j = 0; j < m_out; ++j) {
      if (fb->fibers()[routes[j].from].dim != hf->rank()) {
        throw Error(ErrorKind::NotCompatible, "fiber dimension differs from the free rank");
      }
    }
    return LinearMap::from_function(f.shape(), h.shape(), [&](const ModuleVector& x) {
      auto y = h.zero();
      for (std::size_t i = 0; i < hf->rank(); ++i)
        for (std::size_t j = 0; j < m_out; ++j) y.parts[i * m_out + j](0, 0) = x.parts[routes[j].from](i, 0);
      return y;
    });
  }
  if (ff != nullptr && ff->family() == "free" && hb != nullptr) {
    for (std::size_t j = 0; j < m_out; ++j) {
      if (f.base().dim(routes[j].from) != 1 || hb->fibers()[j].dim != ff->rank()) {
        throw Error(ErrorKind::NotCompatible, "free module does not restrict onto this bundle");
      }
    }
    return LinearMap::from_function(f.shape(), h.shape(), [&](const ModuleVector& x) {
      auto y = h.zero();
      for (std::size_t i = 0; i < ff->rank(); ++i)
        for (std::size_t j = 0; j < m_out; ++j) y.parts[j](i, 0) = x.parts[i * m_in + routes[j].from](0, 0);
      return y;
    });
  }
  throw Error(ErrorKind::NotCompatible, "no canonical restriction from " + f.family() + " to " + h.family());
}

/// Glues F1 and F2 along H using the canonical restriction maps.
inline PullbackPtr pullback_module(ModulePtr left, ModulePtr right, ModulePtr glue, const PullbackAlgebra& algebra) {
  auto psi1 = restriction_map(*left, algebra.phi(), *glue);
  auto psi2 = restriction_map(*right, algebra.psi(), *glue);
  return std::make_shared<PullbackModule>(std::move(left), std::move(right), std::move(glue), algebra,
                                          std::move(psi1), std::move(psi2));
}

inline PullbackPtr pullback_module(ModulePtr left, ModulePtr right, ModulePtr glue, const PullbackAlgebra& algebra,
                                   LinearMap psi_left, LinearMap psi_right) {
  return std::make_shared<PullbackModule>(std::move(left), std::move(right), std::move(glue), algebra,
                                          std::move(psi_left), std::move(psi_right));
}

/// The zero module over the zero algebra.
inline ModulePtr zero_module() { return std::make_shared<FreeHilbertModule>(FdAlgebra::zero(), 0); }

struct CanonicalDecomposition {
  ModulePtr left;    // E / ker(pi_1) E over B1
  ModulePtr right;   // E / ker(pi_2) E over B2
  ModulePtr glue;    // E / ker(phi pi_1) E over D
  PullbackPtr reglued;
  std::size_t samples = 0;
  double rho_residual = 0.0;          // rho of the image vs rho in E
  double norm_residual = 0.0;
  double module_map_residual = 0.0;
  double surjectivity_residual = 0.0;

  static constexpr double kTol = 1e-8;
  bool certified() const {
    return rho_residual <= kTol && norm_residual <= kTol && module_map_residual <= kTol &&
           surjectivity_residual <= kTol;
  }

  /// x -> (x + ker(pi_1) E, x + ker(pi_2) E).
  ModuleVector map(const ModuleVector& x) const { return reglued->join(x, x); }
};

/// E over B1 (+)_D B2 as F1 (+)_H F2, with a sampled certificate that the
/// canonical map is an isometric module isomorphism.
inline CanonicalDecomposition canonical_decompose(const ModulePtr& e, const PullbackAlgebra& p, std::size_t samples,
                                                  std::uint64_t seed) {
  if (!(e->base() == p.algebra())) {
    throw Error(ErrorKind::NotPullbackBase,
                "module base " + e->base().to_string() + " is not the pullback " + p.algebra().to_string());
  }
  CanonicalDecomposition d;
  d.left = quotient_along(e, p.pi_left());
  d.right = quotient_along(e, p.pi_right());
  d.glue = quotient_along(e, p.phi().compose(p.pi_left()));
  const auto id = LinearMap::identity(e->shape());
  d.reglued = pullback_module(d.left, d.right, d.glue, p, id, id);
  d.samples = samples;

  Rng rng(seed);
  const auto e_unit = p.kernel_left().unit();
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e->random_vector(rng);
    const auto a = random_element(e->base(), rng);
    const auto rx = e->rho_squared(x);
    const double nx = finsler::norm(rx);
    const double scale = 1.0 + nx;
    const auto y = d.map(x);
    d.rho_residual = std::max(d.rho_residual, finsler::norm(d.reglued->rho_squared(y) - rx) / scale);
    d.norm_residual = std::max(d.norm_residual, std::abs(d.reglued->norm(y) - std::sqrt(nx)));
    const auto moved = d.reglued->act(a, y) - d.map(e->act(a, x));
    const double ma = 1.0 + norm(a) * norm(a);
    d.module_map_residual =
        std::max(d.module_map_residual, finsler::norm(d.reglued->rho_squared(moved)) / (scale * ma));

    // Preimage of a pullback pair: x1 + e (x2 - x1) with e the unit of ker(pi_1).
    const auto [x1, x2] = d.reglued->split(d.reglued->random_vector(rng));
    const auto pre = x1 + e->act(e_unit, x2 - x1);
    const auto gap = d.map(pre) - d.reglued->join(x1, x2);
    const double gs = 1.0 + finsler::norm(d.reglued->rho_squared(d.reglued->join(x1, x2)));
    d.surjectivity_residual = std::max(d.surjectivity_residual, finsler::norm(d.reglued->rho_squared(gap)) / gs);
  }
  return d;
}

inline CanonicalDecomposition canonical_decompose(const PullbackPtr& e, std::size_t samples, std::uint64_t seed) {
  return canonical_decompose(ModulePtr(e), e->pullback(), samples, seed);
}

}  // namespace finsler
