#pragma once

// Builds modules from their JSON descriptions. Every `describe()` output is
// accepted back, plus a few constructive forms used by scenario files.

#include <memory>
#include <string>

#include "finsler/gen.hpp"

namespace finsler {

inline ModulePtr module_from_json(const json& j, std::uint64_t default_seed = 1);

namespace detail {

inline std::vector<FiberNorm> fibers_from_json(const json& j) {
  if (j.contains("fibers")) {
    std::vector<FiberNorm> out;
    for (const auto& f : j["fibers"]) out.push_back(FiberNorm::from_json(f));
    return out;
  }
  // Shorthand: {"points": n, "fiber": {...}} repeats one fiber.
  const auto points = require_field(j, "points", "module").get<std::size_t>();
  return std::vector<FiberNorm>(points, FiberNorm::from_json(require_field(j, "fiber", "module")));
}

inline LinearMap map_from_json(const json& j, const FinslerModule& from, const FinslerModule& to) {
  const auto m = matrix_from_json(j, from.flat_dim());
  return {from.shape(), to.shape(), m};
}

inline GlueMode glue_mode_from_string(const std::string& s) {
  if (s == "free") return GlueMode::Free;
  if (s == "bundle") return GlueMode::Bundle;
  if (s == "mixed") return GlueMode::Mixed;
  if (s == "decomposition") return GlueMode::Decomposition;
  throw Error(ErrorKind::ConfigInvalid, "unknown glue mode '" + s + "'");
}

}  // namespace detail

inline ModulePtr module_from_json(const json& j, std::uint64_t default_seed) {
  const auto family = require_field(j, "family", "module").get<std::string>();
  try {
    if (family == "free" || family == "frobenius_scalar") {
      const auto a = algebra_from_json(require_field(j, "algebra", "module"), true);
      const auto rank = j.value("rank", std::size_t{1});
      if (family == "free") return std::make_shared<FreeHilbertModule>(a, rank);
      return std::make_shared<FrobeniusScalarCandidate>(a, rank);
    }
    if (family == "bundle") return std::make_shared<BundleSectionModule>(detail::fibers_from_json(j));
    if (family == "quotient") {
      auto parent = module_from_json(require_field(j, "parent", "module"), default_seed);
      const auto blocks = require_field(j, "ideal", "module").get<std::vector<std::size_t>>();
      return std::make_shared<QuotientModule>(parent, Ideal(parent->base(), blocks));
    }
    if (family == "transport") {
      auto inner = module_from_json(require_field(j, "module", "module"), default_seed);
      const auto iso = hom_from_json(require_field(j, "iso", "module"), nullptr, &inner->base());
      return std::make_shared<TransportedModule>(inner, iso);
    }
    if (family == "pullback") {
      auto left = module_from_json(require_field(j, "left", "module"), default_seed);
      auto right = module_from_json(require_field(j, "right", "module"), default_seed);
      auto glue = module_from_json(require_field(j, "glue_module", "module"), default_seed);
      const auto phi = hom_from_json(require_field(j, "phi", "module"), &left->base(), &glue->base());
      const auto psi = hom_from_json(require_field(j, "psi", "module"), &right->base(), &glue->base());
      const PullbackAlgebra p(left->base(), right->base(), glue->base(), phi, psi);
      if (j.contains("psi_left") != j.contains("psi_right")) {
        throw Error(ErrorKind::ConfigInvalid, "give both psi_left and psi_right or neither");
      }
      if (j.contains("psi_left")) {
        auto m1 = detail::map_from_json(j["psi_left"], *left, *glue);
        auto m2 = detail::map_from_json(j["psi_right"], *right, *glue);
        return pullback_module(left, right, glue, p, std::move(m1), std::move(m2));
      }
      return pullback_module(left, right, glue, p);
    }
    if (family == "split") {
      // A = C(X) (+)_0 B: "points" over C(X) and "rest" over B.
      const auto a = algebra_from_json(require_field(j, "algebra", "module"));
      const auto dec = decompose_ideals(a);
      auto points = module_from_json(require_field(j, "points", "module"), default_seed);
      auto rest = j.contains("rest") ? module_from_json(j["rest"], default_seed)
                                     : ModulePtr(std::make_shared<FreeHilbertModule>(dec.quotient, 0));
      auto glued = pullback_module(points, rest, zero_module(), dec.pullback);
      return std::make_shared<TransportedModule>(glued, dec.to_pullback);
    }
    if (family == "counterexample") {
      const auto a = algebra_from_json(require_field(j, "algebra", "module"));
      const double p = double_from_json(require_field(j, "p", "module"));
      return gen_counterexample(a, p, j.value("fiber_dim", std::size_t{2})).module;
    }
    if (family == "generated") {
      const auto cfg = GenConfig::from_json(j.value("gen", json::object()), default_seed);
      Generator g(cfg, j.value("index", std::uint64_t{0}));
      const auto kind = j.value("kind", std::string("module"));
      if (kind == "pullback") return g.pullback_instance(detail::glue_mode_from_string(j.value("mode", "free")));
      const auto a = j.contains("algebra") ? algebra_from_json(j["algebra"]) : g.algebra();
      if (kind == "counterexample") return g.counterexample(a).module;
      if (kind != "module") throw Error(ErrorKind::ConfigInvalid, "unknown generated kind '" + kind + "'");
      return j.contains("module_family") ? g.module(a, j["module_family"].get<std::string>()) : g.module(a);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, "module '" + family + "': " + e.what());
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown module family '" + family + "'");
}

}  // namespace finsler
