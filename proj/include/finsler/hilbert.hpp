#pragma once

// Recovering an inner product from rho by polarization, the parallelogram
// defect, and the refusal witnesses that show a Finsler module is not Hilbert.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "finsler/akemann.hpp"
#include "finsler/checks.hpp"
#include "finsler/families.hpp"

namespace finsler {

inline constexpr std::array<cplx, 4> kUnitPowers{cplx{1, 0}, cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}};

/// (1/4) sum_k i^k rho(x + i^k y)^2.
inline AlgElement polarize(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  auto out = AlgElement::zero(e.base());
  for (auto u : kUnitPowers) out += e.rho_squared(x + u * y) * u;
  return out * 0.25;
}

/// rho(x + y)^2 + rho(x - y)^2 - 2 rho(x)^2 - 2 rho(y)^2.
inline AlgElement parallelogram_element(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  return e.rho_squared(x + y) + e.rho_squared(x - y) - e.rho_squared(x) * 2.0 - e.rho_squared(y) * 2.0;
}

inline double parallelogram_defect(const FinslerModule& e, const ModuleVector& x, const ModuleVector& y) {
  return norm(parallelogram_element(e, x, y));
}

/// Norm of the defect element restricted to blocks outside `ideal`.
inline double defect_outside(const AlgElement& c, const Ideal& ideal) {
  double worst = 0.0;
  for (std::size_t k = 0; k < c.num_blocks(); ++k)
    if (!ideal.contains(k)) worst = std::max(worst, op_norm(c.block(k)));
  return worst;
}

/// Defect element supported in the maximal commutative ideal on unit pairs.
inline VerdictReport check_parallelogram_mod_ideal(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  const Ideal ideal = maximal_commutative_ideal(e.base());
  ResidualTracker t("parallelogram_mod_ideal", 1e-8, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = unit_vector(e, e.random_vector(rng));
    const auto y = unit_vector(e, e.random_vector(rng));
    t.record(defect_outside(parallelogram_element(e, x, y), ideal), [&] {
      return json{{"kind", "parallelogram_mod_ideal"}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
    });
  }
  auto r = t.finish(e.family(), samples);
  if (ideal.is_whole()) r.note = "commutative base: every block lies in the ideal";
  return r;
}

/// Polarization against rho(x)^2 on the diagonal, and against the defining
/// inner product when the module is a free Hilbert module.
inline VerdictReport check_polarization(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  ResidualTracker t("polarization", 1e-10, seed);
  const auto* free = dynamic_cast<const FreeHilbertModule*>(&e);
  const bool oracle = free != nullptr && e.family() == "free";
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng), y = e.random_vector(rng);
    const double scale = 1.0 + e.norm(x) * e.norm(x) + e.norm(y) * e.norm(y);
    t.record(norm(polarize(e, x, x) - e.rho_squared(x)) / scale, [&] {
      return json{{"kind", "polarization_diagonal"}, {"x", vector_to_json(x)}};
    });
    t.record(parallelogram_defect(e, x, x) / scale, [&] {
      return json{{"kind", "parallelogram_diagonal"}, {"x", vector_to_json(x)}};
    });
    if (oracle) {
      t.record(norm(polarize(e, x, y) - free->inner(x, y)) / scale, [&] {
        return json{{"kind", "polarization_inner"}, {"x", vector_to_json(x)}, {"y", vector_to_json(y)}};
      });
    }
  }
  auto r = t.finish(e.family(), samples);
  if (!oracle) r.note = "no inner-product oracle for this family; diagonal identities only";
  return r;
}

/// Residuals of the identities a polarized inner product must satisfy.
struct HilbertCertificate {
  double additivity = 0.0;
  double i_homogeneity = 0.0;
  double rational_homogeneity = 0.0;
  double symmetry = 0.0;
  double diagonal = 0.0;
  double sesquilinearity = 0.0;
  double conjugation = 0.0;  // a rho(x + i^k y)^2 a* = rho(ax + i^k ay)^2

  double max() const {
    return std::max({additivity, i_homogeneity, rational_homogeneity, symmetry, diagonal, sesquilinearity,
                     conjugation});
  }

  json to_json() const {
    return json{{"additivity", additivity},           {"i_homogeneity", i_homogeneity},
                {"rational_homogeneity", rational_homogeneity}, {"symmetry", symmetry},
                {"diagonal", diagonal},               {"sesquilinearity", sesquilinearity},
                {"conjugation", conjugation}};
  }
};

struct HilbertizeResult {
  static constexpr double kAccept = 1e-8;
  static constexpr double kRefuse = 1e-4;
  static constexpr double kCertificateTol = 1e-8;

  Status status = Status::Pass;
  double max_defect = 0.0;
  std::optional<std::pair<ModuleVector, ModuleVector>> witness;  // pair of largest defect
  HilbertCertificate certificate;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  ModulePtr module;

  bool accepted() const { return status == Status::Pass; }
  bool refused() const { return status == Status::Fail && max_defect >= kRefuse; }

  /// The recovered inner product; only meaningful when accepted.
  AlgElement inner(const ModuleVector& x, const ModuleVector& y) const { return polarize(*module, x, y); }

  VerdictReport to_report() const {
    VerdictReport r;
    r.claim = "hilbertize";
    r.status = status;
    r.max_residual = max_defect;
    r.tolerance = kAccept;
    r.samples = samples;
    r.seed = seed;
    r.module = module ? module->family() : "";
    if (witness && status != Status::Pass) {
      r.witness = json{{"kind", "parallelogram"},
                       {"x", vector_to_json(witness->first)},
                       {"y", vector_to_json(witness->second)},
                       {"residual", max_defect}};
    }
    if (status == Status::Pass) {
      r.note = "certificate " + certificate.to_json().dump();
    } else if (max_defect <= kAccept) {
      r.max_residual = certificate.max();
      r.note = "polarized form fails its certificate " + certificate.to_json().dump();
    } else if (status == Status::Inconclusive) {
      r.note = "defect between acceptance and refusal thresholds; raise the sample count";
    } else {
      r.note = "parallelogram law fails; no inner product induces rho";
    }
    return r;
  }
};

/// Decides whether rho comes from an inner product. Unit-normalized random
/// pairs, plus any caller-supplied candidate pairs, are tested against the
/// parallelogram law; on acceptance the polarized form is certified.
inline HilbertizeResult hilbertize(const ModulePtr& e, std::size_t samples, std::uint64_t seed,
                                   const std::vector<std::pair<ModuleVector, ModuleVector>>& candidates = {}) {
  HilbertizeResult res;
  res.samples = samples;
  res.seed = seed;
  res.module = e;
  Rng rng(seed);
  auto consider = [&](const ModuleVector& x, const ModuleVector& y) {
    const double d = parallelogram_defect(*e, x, y);
    if (!res.witness || d > res.max_defect) {
      res.max_defect = d;
      res.witness = std::make_pair(x, y);
    }
  };
  for (const auto& [x, y] : candidates) consider(unit_vector(*e, x), unit_vector(*e, y));
  for (std::size_t i = 0; i < samples; ++i) {
    consider(unit_vector(*e, e->random_vector(rng)), unit_vector(*e, e->random_vector(rng)));
  }
  if (res.max_defect >= HilbertizeResult::kRefuse) {
    res.status = Status::Fail;
    return res;
  }
  if (res.max_defect > HilbertizeResult::kAccept) {
    res.status = Status::Inconclusive;
    return res;
  }
  res.status = Status::Pass;
  auto& c = res.certificate;
  const std::size_t checks = std::max<std::size_t>(1, samples / 4);
  for (std::size_t i = 0; i < checks; ++i) {
    const auto x = unit_vector(*e, e->random_vector(rng));
    const auto y = unit_vector(*e, e->random_vector(rng));
    const auto z = unit_vector(*e, e->random_vector(rng));
    const auto a = random_element(e->base(), rng);
    const auto b = random_element(e->base(), rng);
    const double na = 1.0 + norm(a), nb = 1.0 + norm(b);
    const auto xy = polarize(*e, x, y);
    c.additivity = std::max(c.additivity, norm(polarize(*e, x + z, y) - xy - polarize(*e, z, y)));
    c.i_homogeneity = std::max(c.i_homogeneity, norm(polarize(*e, cplx{0, 1} * x, y) - xy * cplx{0, 1}));
    const double q = static_cast<double>(static_cast<int>(rng.below(9)) - 4) /
                     static_cast<double>(1 + rng.below(5));
    c.rational_homogeneity = std::max(c.rational_homogeneity, norm(polarize(*e, q * x, y) - xy * q) / (1.0 + std::abs(q)));
    c.symmetry = std::max(c.symmetry, norm(adjoint(xy) - polarize(*e, y, x)));
    c.diagonal = std::max(c.diagonal, norm(polarize(*e, x, x) - e->rho_squared(x)));
    const auto ax = e->act(a, x), by = e->act(b, y);
    c.sesquilinearity =
        std::max(c.sesquilinearity, norm(polarize(*e, ax, by) - a * xy * adjoint(b)) / (na * nb));
    for (auto u : kUnitPowers) {
      const auto lhs = a * e->rho_squared(x + u * y) * adjoint(a);
      const auto rhs = e->rho_squared(ax + u * e->act(a, y));
      c.conjugation = std::max(c.conjugation, norm(lhs - rhs) / (na * na));
    }
  }
  if (c.max() > HilbertizeResult::kCertificateTol) res.status = Status::Fail;
  return res;
}

/// Self-adjoint a with a xi = xi, b a = 0 and b b* = a^2, built from xi and a
/// unit zeta orthogonal to it.
struct OrthogonalWitness {
  CMatrix a;
  CMatrix b;
  std::vector<cplx> xi;
  std::vector<cplx> zeta;

  double self_adjoint_residual() const { return (a - a.adjoint()).max_abs(); }
  double fixes_xi_residual() const {
    const auto v = CMatrix::column(xi);
    return (a * v - v).max_abs();
  }
  double annihilates_residual() const { return (b * a).max_abs(); }
  double square_residual() const { return (b * b.adjoint() - a * a).max_abs(); }
  double max_residual() const {
    return std::max({self_adjoint_residual(), fixes_xi_residual(), annihilates_residual(), square_residual()});
  }
};

inline OrthogonalWitness orthogonal_witness(std::span<const cplx> xi) {
  const std::size_t n = xi.size();
  if (n < 2) throw Error(ErrorKind::DimensionTooSmall, "need dimension at least 2, got " + std::to_string(n));
  double nrm = 0.0;
  for (auto z : xi) nrm += std::norm(z);
  if (std::abs(std::sqrt(nrm) - 1.0) > 1e-12) throw Error(ErrorKind::ConfigInvalid, "xi must be a unit vector");

  OrthogonalWitness w;
  w.xi.assign(xi.begin(), xi.end());
  // Gram-Schmidt on the basis vector least aligned with xi.
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(xi[i]) < std::abs(xi[k])) k = i;
  w.zeta.assign(n, 0.0);
  w.zeta[k] = 1.0;
  const cplx overlap = std::conj(xi[k]);
  for (std::size_t i = 0; i < n; ++i) w.zeta[i] -= overlap * xi[i];
  detail::normalize(w.zeta);

  const CMatrix c = CMatrix::outer(w.xi, w.xi);
  const CMatrix s = CMatrix::outer(w.xi, w.zeta) + CMatrix::outer(w.zeta, w.xi);
  // f and g are the spectral projections of c onto {1} and {0}.
  const CMatrix f = c;
  const CMatrix g = CMatrix::identity(n) - c;
  w.a = c;
  w.b = f * s * g;
  return w;
}

/// Certifies that rho and an alternative positive-valued map induce
/// different scalar norms wherever their squares differ on samples.
inline VerdictReport distinguishing_witness(const FinslerModule& e,
                                            const std::function<AlgElement(const ModuleVector&)>& rho_alt_squared,
                                            std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  VerdictReport r;
  r.claim = "rho_uniqueness";
  r.tolerance = 1e-9;
  r.samples = samples;
  r.seed = seed;
  r.module = e.family();
  std::size_t distinguished = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e.random_vector(rng);
    const auto b = e.rho_squared(x);
    const auto c = rho_alt_squared(x);
    const double diff = norm(b - c);
    if (diff <= r.tolerance * (1.0 + norm(b))) continue;
    const auto w = akemann_gap_witness(b, c);
    ++distinguished;
    // The witness must separate by at least half the difference.
    const double shortfall = std::max(0.0, 0.5 * diff - w.achieved_gap);
    r.max_residual = std::max(r.max_residual, shortfall);
    if (w.achieved_gap > best_gap) {
      best_gap = w.achieved_gap;
      r.witness = json{{"kind", "rho_uniqueness"},
                       {"x", vector_to_json(x)},
                       {"a", element_to_json(w.a)},
                       {"norm_rho", norm(w.a * b * w.a)},
                       {"norm_alt", norm(w.a * c * w.a)},
                       {"difference", diff}};
    }
  }
  r.status = r.max_residual <= r.tolerance ? Status::Pass : Status::Fail;
  r.note = distinguished == 0 ? "indistinguishable on samples"
                              : "distinguished on " + std::to_string(distinguished) + " samples";
  return r;
}

}  // namespace finsler
