#pragma once

// Seeded generation of algebras, elements, modules, glued instances and
// non-Hilbert counterexamples. Instance `index` draws from its own stream
// split off the configured seed, so instances can be generated in any order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "finsler/hilbert.hpp"
#include "finsler/pullback.hpp"

namespace finsler {

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t max_blocks = 3;
  std::vector<std::size_t> dim_pool{1, 2, 3, 4};
  std::vector<std::string> module_families{"free", "bundle", "quotient", "pullback"};
  std::vector<double> fiber_p_pool{1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
  std::size_t samples = 200;
  std::size_t max_total_dim = 12;  // bound on the sum of block sizes
  std::size_t max_rank = 2;
  std::size_t max_fiber_dim = 3;

  static const std::vector<std::string>& known_families() {
    static const std::vector<std::string> f{"free", "bundle", "quotient", "pullback"};
    return f;
  }

  void validate() const {
    if (samples < 1) throw Error(ErrorKind::ConfigInvalid, "gen.samples must be at least 1");
    if (dim_pool.empty()) throw Error(ErrorKind::ConfigInvalid, "gen.dim_pool must not be empty");
    for (auto d : dim_pool)
      if (d < 1) throw Error(ErrorKind::ConfigInvalid, "gen.dim_pool entries must be positive");
    if (max_blocks < 1) throw Error(ErrorKind::ConfigInvalid, "gen.max_blocks must be at least 1");
    if (max_total_dim < *std::min_element(dim_pool.begin(), dim_pool.end())) {
      throw Error(ErrorKind::ConfigInvalid, "gen.max_total_dim is smaller than every pooled block");
    }
    if (max_rank < 1 || max_fiber_dim < 1) throw Error(ErrorKind::ConfigInvalid, "gen ranks must be positive");
    if (module_families.empty()) throw Error(ErrorKind::ConfigInvalid, "gen.module_families must not be empty");
    for (const auto& f : module_families) {
      const auto& k = known_families();
      if (std::find(k.begin(), k.end(), f) == k.end()) {
        throw Error(ErrorKind::ConfigInvalid, "unknown module family '" + f + "'");
      }
    }
    if (fiber_p_pool.empty()) throw Error(ErrorKind::ConfigInvalid, "gen.fiber_p_pool must not be empty");
    for (double p : fiber_p_pool)
      if (!(p >= 1.0)) throw Error(ErrorKind::ConfigInvalid, "fiber exponents must be >= 1");
  }

  json to_json() const {
    json pool = json::array();
    for (double p : fiber_p_pool) pool.push_back(double_to_json(p));
    return json{{"seed", seed},
                {"max_blocks", max_blocks},
                {"dim_pool", dim_pool},
                {"module_families", module_families},
                {"fiber_p_pool", pool},
                {"samples", samples},
                {"max_total_dim", max_total_dim},
                {"max_rank", max_rank},
                {"max_fiber_dim", max_fiber_dim}};
  }

  static GenConfig from_json(const json& j, std::uint64_t default_seed) {
    if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "gen config must be an object");
    static const std::set<std::string> keys{"seed",    "max_blocks",    "dim_pool", "module_families", "fiber_p_pool",
                                            "samples", "max_total_dim", "max_rank", "max_fiber_dim"};
    for (const auto& [k, v] : j.items())
      if (!keys.count(k)) throw Error(ErrorKind::ConfigInvalid, "unknown field 'gen." + k + "'");
    GenConfig c;
    c.seed = default_seed;
    try {
      if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("max_blocks")) c.max_blocks = j["max_blocks"].get<std::size_t>();
      if (j.contains("dim_pool")) c.dim_pool = j["dim_pool"].get<std::vector<std::size_t>>();
      if (j.contains("module_families")) c.module_families = j["module_families"].get<std::vector<std::string>>();
      if (j.contains("fiber_p_pool")) {
        c.fiber_p_pool.clear();
        for (const auto& p : j["fiber_p_pool"]) c.fiber_p_pool.push_back(double_from_json(p));
      }
      if (j.contains("samples")) c.samples = j["samples"].get<std::size_t>();
      if (j.contains("max_total_dim")) c.max_total_dim = j["max_total_dim"].get<std::size_t>();
      if (j.contains("max_rank")) c.max_rank = j["max_rank"].get<std::size_t>();
      if (j.contains("max_fiber_dim")) c.max_fiber_dim = j["max_fiber_dim"].get<std::size_t>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigInvalid, std::string("gen config: ") + e.what());
    }
    c.validate();
    return c;
  }
};

/// A module that is Finsler but not Hilbert, with the pair exhibiting it.
struct Counterexample {
  ModulePtr module;
  ModuleVector x;
  ModuleVector y;
  double p = 1.0;
  std::size_t fiber_dim = 2;
  double defect = 0.0;     // parallelogram defect at (x, y), evaluated on the module
  double predicted = 0.0;  // |2 * 2^{2/p} - 4| from the fiber norm alone

  json witness_json() const {
    return json{{"x", vector_to_json(x)}, {"y", vector_to_json(y)}, {"defect", defect}, {"predicted", predicted}};
  }
};

/// Minimum defect a counterexample must certify.
inline constexpr double kCounterexampleDefect = 0.1;

inline double predicted_lp_defect(double p) {
  const double s = std::isinf(p) ? 1.0 : std::pow(2.0, 2.0 / p);
  return std::abs(2.0 * s - 4.0);
}

/// l^p fibers of dimension `fiber_dim` over the one-dimensional blocks of A,
/// extended by zero over the rest of A.
inline Counterexample gen_counterexample(const FdAlgebra& a, double p, std::size_t fiber_dim = 2) {
  const auto dec = decompose_ideals(a);
  if (dec.commutative_ideal.is_zero()) {
    throw Error(ErrorKind::NoCommutativeIdeal, a.to_string() + " has no one-dimensional block");
  }
  if (fiber_dim < 2) throw Error(ErrorKind::ConfigInvalid, "counterexample fibers need dimension >= 2");
  if (!(p >= 1.0)) throw Error(ErrorKind::ConfigInvalid, "fiber exponent must be >= 1");
  Counterexample ce;
  ce.p = p;
  ce.fiber_dim = fiber_dim;
  ce.predicted = predicted_lp_defect(p);
  if (ce.predicted < kCounterexampleDefect) {
    throw Error(ErrorKind::ConfigInvalid, "l^" + std::to_string(p) + " fibers are too close to Hilbert");
  }
  const std::vector<FiberNorm> fibers(dec.points.size(), FiberNorm::lp(fiber_dim, p));
  auto bundle = std::make_shared<BundleSectionModule>(fibers);
  if (a.is_commutative()) {
    ce.module = bundle;
  } else {
    auto rest = std::make_shared<FreeHilbertModule>(dec.quotient, 0);
    auto glued = pullback_module(bundle, rest, zero_module(), dec.pullback);
    ce.module = std::make_shared<TransportedModule>(glued, dec.to_pullback);
  }
  ce.x = ce.module->zero();
  ce.y = ce.module->zero();
  ce.x.parts[0](0, 0) = 1.0;
  ce.y.parts[0](1, 0) = 1.0;
  ce.defect = parallelogram_defect(*ce.module, ce.x, ce.y);
  return ce;
}

enum class GlueMode { Free, Bundle, Mixed, Decomposition };

inline std::string to_string(GlueMode m) {
  switch (m) {
    case GlueMode::Free: return "free";
    case GlueMode::Bundle: return "bundle";
    case GlueMode::Mixed: return "mixed";
    case GlueMode::Decomposition: return "decomposition";
  }
  return "?";
}

class Generator {
 public:
  Generator(GenConfig cfg, std::uint64_t index) : cfg_(std::move(cfg)), index_(index), rng_(Rng(cfg_.seed).split(index)) {
    cfg_.validate();
  }

  const GenConfig& config() const { return cfg_; }
  std::uint64_t index() const { return index_; }
  Rng& rng() { return rng_; }

  std::size_t pick_dim() { return cfg_.dim_pool[rng_.below(cfg_.dim_pool.size())]; }
  double pick_p() { return cfg_.fiber_p_pool[rng_.below(cfg_.fiber_p_pool.size())]; }

  FdAlgebra algebra() {
    const std::size_t blocks = 1 + rng_.below(cfg_.max_blocks);
    std::vector<std::size_t> dims;
    std::size_t total = 0;
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto d = pick_dim();
      if (total + d > cfg_.max_total_dim) continue;
      dims.push_back(d);
      total += d;
    }
    if (dims.empty()) dims.push_back(*std::min_element(cfg_.dim_pool.begin(), cfg_.dim_pool.end()));
    return FdAlgebra(std::move(dims));
  }

  FdAlgebra commutative_algebra(std::size_t max_points = 4) { return FdAlgebra::commutative(1 + rng_.below(max_points)); }

  AlgElement element(const FdAlgebra& a) { return random_element(a, rng_); }
  AlgElement positive(const FdAlgebra& a) { return random_positive(a, rng_); }
  ModuleVector vector(const FinslerModule& e) { return e.random_vector(rng_); }

  FiberNorm fiber(std::size_t dim) {
    FiberNorm f = FiberNorm::lp(dim, pick_p());
    if (rng_.below(3) == 0) {
      f.weights.resize(dim);
      for (auto& w : f.weights) w = rng_.uniform(0.5, 2.0);
    }
    return f;
  }

  std::shared_ptr<BundleSectionModule> bundle(std::size_t points) {
    std::vector<FiberNorm> fibers;
    for (std::size_t t = 0; t < points; ++t) fibers.push_back(fiber(1 + rng_.below(cfg_.max_fiber_dim)));
    return std::make_shared<BundleSectionModule>(std::move(fibers));
  }

  std::shared_ptr<FreeHilbertModule> free(const FdAlgebra& a) {
    return std::make_shared<FreeHilbertModule>(a, 1 + rng_.below(cfg_.max_rank));
  }

  /// Families allowed over `a`: bundles need a commutative base.
  std::vector<std::string> families_for(const FdAlgebra& a) const {
    std::vector<std::string> out;
    for (const auto& f : cfg_.module_families)
      if (f != "bundle" || a.is_commutative()) out.push_back(f);
    return out;
  }

  ModulePtr module(const FdAlgebra& a) {
    const auto allowed = families_for(a);
    if (allowed.empty()) throw Error(ErrorKind::ConfigInvalid, "no enabled module family fits " + a.to_string());
    return module(a, allowed[rng_.below(allowed.size())]);
  }

  ModulePtr module(const FdAlgebra& a, const std::string& family) {
    if (family == "free") return free(a);
    if (family == "bundle") {
      if (!a.is_commutative()) {
        throw Error(ErrorKind::ConfigInvalid, "bundle modules need a commutative base, got " + a.to_string());
      }
      return bundle(a.num_blocks());
    }
    if (family == "quotient") return quotient(a);
    if (family == "pullback") return decomposition_pullback(a);
    throw Error(ErrorKind::ConfigInvalid, "unknown module family '" + family + "'");
  }

  /// A parent over A (+) extra blocks, divided by the extra blocks.
  ModulePtr quotient(const FdAlgebra& a) {
    std::vector<std::size_t> dims = a.dims();
    const std::size_t extra = 1 + rng_.below(2);
    const bool commutative = a.is_commutative() && rng_.below(2) == 0;
    for (std::size_t k = 0; k < extra; ++k) dims.push_back(commutative ? 1 : pick_dim());
    const FdAlgebra big(dims);
    std::vector<std::size_t> ideal;
    for (std::size_t k = a.num_blocks(); k < dims.size(); ++k) ideal.push_back(k);
    ModulePtr parent = commutative ? ModulePtr(bundle(dims.size())) : ModulePtr(free(big));
    return std::make_shared<QuotientModule>(parent, Ideal(big, ideal));
  }

  /// Over A = C(X) (+)_0 B: a bundle on X glued to a free module over B.
  ModulePtr decomposition_pullback(const FdAlgebra& a) {
    const auto dec = decompose_ideals(a);
    auto left = bundle(dec.points.size());
    auto right = free(dec.quotient);
    auto glued = pullback_module(left, right, zero_module(), dec.pullback);
    return std::make_shared<TransportedModule>(glued, dec.to_pullback);
  }

  /// B1 (+)_D B2 with shared blocks conjugated by random unitaries.
  PullbackAlgebra glued_algebra(bool commutative) {
    const std::size_t shared = 1 + rng_.below(2);
    std::vector<std::size_t> d_dims;
    for (std::size_t j = 0; j < shared; ++j) d_dims.push_back(commutative ? 1 : pick_dim());
    const FdAlgebra d(d_dims);
    auto side = [&](std::vector<StarHom::Route>& routes) {
      std::vector<std::size_t> dims = d_dims;
      const std::size_t extra = rng_.below(3);
      for (std::size_t k = 0; k < extra; ++k) dims.push_back(commutative ? 1 : pick_dim());
      // Shuffle so glued blocks are not always first.
      std::vector<std::size_t> order(dims.size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);
      std::vector<std::size_t> shuffled(dims.size());
      for (std::size_t i = 0; i < dims.size(); ++i) shuffled[order[i]] = dims[i];
      routes.clear();
      for (std::size_t j = 0; j < shared; ++j) {
        routes.push_back({order[j], random_unitary(d_dims[j], rng_)});
      }
      return FdAlgebra(std::move(shuffled));
    };
    std::vector<StarHom::Route> phi_routes, psi_routes;
    const FdAlgebra b1 = side(phi_routes);
    const FdAlgebra b2 = side(psi_routes);
    return {b1, b2, d, StarHom(b1, d, phi_routes), StarHom(b2, d, psi_routes)};
  }

  /// A glued module F1 (+)_H F2 with nontrivial glue.
  PullbackPtr pullback_instance(GlueMode mode) {
    if (mode == GlueMode::Decomposition) {
      const auto a = algebra();
      const auto dec = decompose_ideals(a);
      return pullback_module(bundle(dec.points.size()), free(dec.quotient), zero_module(), dec.pullback);
    }
    if (mode == GlueMode::Free) {
      const auto p = glued_algebra(false);
      const std::size_t rank = 1 + rng_.below(cfg_.max_rank);
      return pullback_module(std::make_shared<FreeHilbertModule>(p.left(), rank),
                             std::make_shared<FreeHilbertModule>(p.right(), rank),
                             std::make_shared<FreeHilbertModule>(p.glue(), rank), p);
    }
    const auto p = glued_algebra(true);
    if (mode == GlueMode::Bundle) {
      std::vector<FiberNorm> shared;
      for (std::size_t j = 0; j < p.glue().num_blocks(); ++j) shared.push_back(fiber(1 + rng_.below(cfg_.max_fiber_dim)));
      auto side = [&](const StarHom& hom) {
        std::vector<FiberNorm> fibers;
        for (std::size_t t = 0; t < hom.source().num_blocks(); ++t) fibers.push_back(fiber(1 + rng_.below(cfg_.max_fiber_dim)));
        for (std::size_t j = 0; j < hom.routes().size(); ++j) fibers[hom.routes()[j].from] = shared[j];
        return std::make_shared<BundleSectionModule>(std::move(fibers));
      };
      return pullback_module(side(p.phi()), side(p.psi()), std::make_shared<BundleSectionModule>(shared), p);
    }
    // Mixed: a bundle with Euclidean fibers at the glued points, a free module
    // on the other side, and a free glue module of the same rank.
    const std::size_t rank = 1 + rng_.below(cfg_.max_fiber_dim);
    std::vector<FiberNorm> fibers;
    for (std::size_t t = 0; t < p.left().num_blocks(); ++t) fibers.push_back(fiber(1 + rng_.below(cfg_.max_fiber_dim)));
    for (const auto& r : p.phi().routes()) fibers[r.from] = FiberNorm::lp(rank, 2.0);
    return pullback_module(std::make_shared<BundleSectionModule>(std::move(fibers)),
                           std::make_shared<FreeHilbertModule>(p.right(), rank),
                           std::make_shared<FreeHilbertModule>(p.glue(), rank), p);
  }

  Counterexample counterexample(const FdAlgebra& a) {
    std::vector<double> pool;
    for (double p : cfg_.fiber_p_pool)
      if (predicted_lp_defect(p) >= kCounterexampleDefect) pool.push_back(p);
    if (pool.empty()) throw Error(ErrorKind::ConfigInvalid, "fiber_p_pool has no exponent far enough from 2");
    const double p = pool[rng_.below(pool.size())];
    return gen_counterexample(a, p, 2 + rng_.below(std::max<std::size_t>(cfg_.max_fiber_dim, 2) - 1));
  }

  /// Byte-stable description of instance `index`: an algebra and a module.
  json instance() {
    const auto a = algebra();
    const auto e = module(a);
    return json{{"schema_version", kSchemaVersion},
                {"generator", kGeneratorName},
                {"seed", cfg_.seed},
                {"index", index_},
                {"algebra", algebra_to_json(a)},
                {"module", e->describe()}};
  }

 private:
  GenConfig cfg_;
  std::uint64_t index_;
  Rng rng_;
};

}  // namespace finsler
