#pragma once

// Sampled checkers for the Finsler axioms and their first consequences.
// Each residual has a free function so that a reported witness can be
// re-evaluated without rerunning the sampler.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "finsler/module.hpp"
#include "finsler/verdict.hpp"

namespace finsler {

inline constexpr double kAxiomTol = 1e-9;
inline constexpr double kCommutativeTol = 1e-10;

// ---- residuals ----

/// ||rho(ax)^2 - a rho(x)^2 a*|| / (1 + ||x||^2 ||a||^2).
inline double axiom2_residual(const FinslerModule& e, const AlgElement& a, const ModuleVector& x) {
  const auto r2 = e.rho_squared(x);
  const double na = norm(a);
  const auto lhs = e.rho_squared(e.act(a, x));
  return norm(lhs - a * r2 * adjoint(a)) / (1.0 + norm(r2) * na * na);
}

/// Excess of ||ax|| over ||a|| ||x||.
inline double banach_residual(const FinslerModule& e, const AlgElement& a, const ModuleVector& x) {
  const double bound = norm(a) * e.norm(x);
  return std::max(0.0, e.norm(e.act(a, x)) - bound) / (1.0 + bound);
}

/// ||rho(ax) - |a| rho(x)|| for central a.
inline double central_residual(const FinslerModule& e, const AlgElement& a, const ModuleVector& x) {
  const auto lhs = e.rho(e.act(a, x));
  const auto rhs = abs_elem(a) * e.rho(x);
  return norm(lhs - rhs) / (1.0 + norm(a) * e.norm(x));
}

inline double homogeneity_residual(const FinslerModule& e, cplx lambda, const ModuleVector& x) {
  const double want = std::abs(lambda) * e.norm(x);
  return std::abs(e.norm(lambda * x) - want) / (1.0 + want);
}

inline double triangle_residual(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  const double nx = e.norm(x), ny = e.norm(y);
  return std::max(0.0, e.norm(x + y) - nx - ny) / (1.0 + nx + ny);
}

/// Largest entrywise excess of rho(x + y) over rho(x) + rho(y).
inline double commutative_triangle_residual(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  const auto s = e.rho(x + y), rx = e.rho(x), ry = e.rho(y);
  double worst = 0.0;
  for (std::size_t t = 0; t < s.num_blocks(); ++t) {
    const double excess = s.block(t)(0, 0).real() - rx.block(t)(0, 0).real() - ry.block(t)(0, 0).real();
    worst = std::max(worst, excess);
  }
  return worst;
}

/// Excess of ||rho(x)^2 - rho(y)^2|| over 2 max(||x||, ||y||) ||x - y||.
inline double lipschitz_residual(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  const double lhs = norm(e.rho_squared(x) - e.rho_squared(y));
  const double bound = 2.0 * std::max(e.norm(x), e.norm(y)) * e.norm(x - y);
  return std::max(0.0, lhs - bound);
}

/// Excess of ||fx + (1 - f)y|| over max(||x||, ||y||).
inline double a_convex_residual(const FinslerModule& e, const AlgElement& f, const ModuleVector& x,
                                const ModuleVector& y) {
  const auto g = AlgElement::identity(f.algebra()) - f;
  return std::max(0.0, e.norm(e.act(f, x) + e.act(g, y)) - std::max(e.norm(x), e.norm(y)));
}

/// | ||x|| - max(||px||, ||(1 - p)x||) |.
inline double linf_residual(const FinslerModule& e, const AlgElement& p, const ModuleVector& x) {
  const auto q = AlgElement::identity(p.algebra()) - p;
  return std::abs(e.norm(x) - std::max(e.norm(e.act(p, x)), e.norm(e.act(q, x))));
}

inline void require_commutative_base(const FinslerModule& e) {
  if (!e.base().is_commutative()) {
    throw Error(ErrorKind::NotCommutativeBase, "base " + e.base().to_string() + " is not commutative");
  }
}

/// Projection onto the points in `mask`.
inline AlgElement indicator(const FdAlgebra& a, std::uint64_t mask) {
  std::vector<cplx> v(a.num_blocks());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = ((mask >> t) & 1U) ? 1.0 : 0.0;
  return AlgElement::central(a, v);
}

inline AlgElement random_central(const FdAlgebra& a, Rng& rng) {
  std::vector<cplx> v(a.num_blocks());
  for (auto& z : v) z = rng.complex_normal();
  return AlgElement::central(a, v);
}

/// Scales x to norm one unless it vanishes.
inline ModuleVector unit_vector(const FinslerModule& e, ModuleVector x) {
  const double n = e.norm(x);
  if (n > 1e-12) x *= 1.0 / n;
  return x;
}

// ---- checkers ----

inline VerdictReport check_norm_axioms(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("norm_axioms", kAxiomTol, seed);
  t.record(e.norm(e.zero()), [&] { return json{{"kind", "norm_zero"}}; });
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng), y = e.random_vector(rng);
    const cplx lambda = rng.complex_normal() * 2.0;
    t.record(homogeneity_residual(e, lambda, x), [&] {
      return json{{"kind", "norm_homogeneity"}, {"lambda", complex_to_json(lambda)}, {"x", vector_to_json(x)}};
    });
    t.record(triangle_residual(e, x, y), [&] {
      return json{{"kind", "norm_triangle"}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_finsler_axiom2(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("finsler_axiom2", kAxiomTol, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    const auto a = random_element(e.base(), rng);
    t.record(axiom2_residual(e, a, x), [&] {
      return json{{"kind", "finsler_axiom2"}, {"a", element_to_json(a)}, {"x", vector_to_json(x)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_banach_module(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("banach_module", kAxiomTol, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    const auto a = random_element(e.base(), rng);
    t.record(banach_residual(e, a, x), [&] {
      return json{{"kind", "banach_module"}, {"a", element_to_json(a)}, {"x", vector_to_json(x)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_central_homogeneity(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("central_homogeneity", kAxiomTol, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    const auto a = random_central(e.base(), rng);
    t.record(central_residual(e, a, x), [&] {
      return json{{"kind", "central_homogeneity"}, {"a", element_to_json(a)}, {"x", vector_to_json(x)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_commutative_triangle(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  require_commutative_base(e);
  Rng rng(seed);
  ResidualTracker t("commutative_triangle", kCommutativeTol, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng), y = e.random_vector(rng);
    t.record(commutative_triangle_residual(e, x, y), [&] {
      return json{{"kind", "commutative_triangle"}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_lipschitz_bound(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("lipschitz_bound", kAxiomTol, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    // Nearby pairs make the bound tight enough to be informative.
    const auto y = (i % 2 == 0) ? x + e.random_vector(rng) * 1e-3 : e.random_vector(rng);
    t.record(lipschitz_residual(e, x, y), [&] {
      return json{{"kind", "lipschitz_bound"}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
    });
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_a_convex(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  require_commutative_base(e);
  Rng rng(seed);
  ResidualTracker t("a_convexity", kCommutativeTol, seed);
  const auto& a = e.base();
  const std::size_t points = a.num_blocks();
  auto witness = [&](const AlgElement& f, const ModuleVector& x, const ModuleVector& y) {
    return json{{"kind", "a_convexity"}, {"f", element_to_json(f)}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
  };
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = unit_vector(e, e.random_vector(rng));
    const auto y = e.random_vector(rng) * rng.uniform(0.0, 2.0);
    std::vector<cplx> fv(points);
    for (auto& v : fv) v = rng.uniform();
    const auto f = AlgElement::central(a, fv);
    t.record(a_convex_residual(e, f, x, y), [&] { return witness(f, x, y); });
  }
  // Indicator partitions of unity on a few pairs.
  const std::size_t pairs = std::min<std::size_t>(samples, 4);
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto x = e.random_vector(rng), y = e.random_vector(rng);
    if (points <= 10) {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << points); ++mask) {
        const auto f = indicator(a, mask);
        t.record(a_convex_residual(e, f, x, y), [&] { return witness(f, x, y); });
      }
    } else {
      for (std::size_t k = 0; k < 64; ++k) {
        const auto f = indicator(a, rng.next());
        t.record(a_convex_residual(e, f, x, y), [&] { return witness(f, x, y); });
      }
    }
  }
  return t.finish(e.family(), samples);
}

inline VerdictReport check_linf_norm_property(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  require_commutative_base(e);
  Rng rng(seed);
  ResidualTracker t("linf_norm_property", kCommutativeTol, seed);
  const auto& a = e.base();
  const std::size_t points = a.num_blocks();
  const bool exhaustive = points <= 10;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    const std::uint64_t count = exhaustive ? (std::uint64_t{1} << points) : 64;
    for (std::uint64_t k = 0; k < count; ++k) {
      const auto p = indicator(a, exhaustive ? k : rng.next());
      t.record(linf_residual(e, p, x), [&] {
        return json{{"kind", "linf_norm_property"}, {"p", element_to_json(p)}, {"x", vector_to_json(x)}};
      });
    }
  }
  auto r = t.finish(e.family(), samples);
  r.note = exhaustive ? "all projections enumerated" : "projections sampled";
  return r;
}

/// Re-evaluates the residual recorded in a witness.
inline double witness_residual(const FinslerModule& e, const json& w) {
  const auto kind = require_field(w, "kind", "witness").get<std::string>();
  auto vec = [&](const char* k) { return vector_from_json(require_field(w, k, "witness")); };
  auto elem = [&](const char* k) { return element_from_json(require_field(w, k, "witness")); };
  if (kind == "norm_zero") return e.norm(e.zero());
  if (kind == "norm_homogeneity") return homogeneity_residual(e, complex_from_json(w.at("lambda")), vec("x"));
  if (kind == "norm_triangle") return triangle_residual(e, vec("x"), vec("y"));
  if (kind == "finsler_axiom2") return axiom2_residual(e, elem("a"), vec("x"));
  if (kind == "banach_module") return banach_residual(e, elem("a"), vec("x"));
  if (kind == "central_homogeneity") return central_residual(e, elem("a"), vec("x"));
  if (kind == "commutative_triangle") return commutative_triangle_residual(e, vec("x"), vec("y"));
  if (kind == "lipschitz_bound") return lipschitz_residual(e, vec("x"), vec("y"));
  if (kind == "a_convexity") return a_convex_residual(e, elem("f"), vec("x"), vec("y"));
  if (kind == "linf_norm_property") return linf_residual(e, elem("p"), vec("x"));
  throw Error(ErrorKind::ConfigInvalid, "unknown witness kind '" + kind + "'");
}

}  // namespace finsler
