#pragma once

// Quotients by ideals with their kernel certificate, and the decomposition
// of a Finsler module along the maximal commutative ideal of its base.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "finsler/hilbert.hpp"
#include "finsler/pullback.hpp"

namespace finsler {

/// Sampled evidence that IE is exactly the kernel of rho' on E/IE.
struct QuotientKernelCertificate {
  static constexpr double kIdealTol = 1e-9;
  static constexpr double kKernelTol = 1e-8;

  double ideal_in_kernel = 0.0;  // ||rho'(a x)|| for a in I
  double kernel_rho = 0.0;       // ||rho'(v)|| for v in the null space of x -> (1 - e) x
  double unit_identity = 0.0;    // | ||x - e x||^2 - ||rho'(x)||^2 |, forcing ker rho' in IE
  double descent = 0.0;          // ||rho'(x + y)^2 - rho'(x)^2|| for y in IE
  std::size_t kernel_dimension = 0;
  std::size_t samples = 0;

  bool passed() const {
    return ideal_in_kernel <= kIdealTol && descent <= kIdealTol && kernel_rho <= kKernelTol &&
           unit_identity <= kKernelTol;
  }
  double max_residual() const { return std::max({ideal_in_kernel, kernel_rho, unit_identity, descent}); }

  json to_json() const {
    return json{{"ideal_in_kernel", ideal_in_kernel}, {"kernel_rho", kernel_rho},
                {"unit_identity", unit_identity},     {"descent", descent},
                {"kernel_dimension", kernel_dimension}, {"samples", samples}};
  }
};

struct QuotientResult {
  std::shared_ptr<const QuotientModule> module;
  QuotientKernelCertificate certificate;
};

/// Orthonormal basis (flattened) of the null space of a linear map.
inline std::vector<std::vector<cplx>> null_space(const CMatrix& m, double rel = 1e-10) {
  std::vector<std::vector<cplx>> basis;
  if (m.cols() == 0) return basis;
  const CMatrix gram = m.adjoint() * m;
  const auto eig = herm_eig(gram);
  const double top = std::max(eig.values.front(), 0.0);
  for (std::size_t i = 0; i < eig.values.size(); ++i)
    if (eig.values[i] <= rel * (1.0 + top)) basis.push_back(eig.vectors.column_vector(i));
  return basis;
}

inline QuotientResult quotient_module(const ModulePtr& e, const Ideal& ideal, std::size_t samples = 32,
                                      std::uint64_t seed = 1) {
  QuotientResult out;
  out.module = std::make_shared<QuotientModule>(e, ideal);
  const auto& q = *out.module;
  auto& cert = out.certificate;
  cert.samples = samples;
  const FdAlgebra& a = e->base();
  const auto unit = ideal.unit();
  const auto co_unit = AlgElement::identity(a) - unit;
  Rng rng(seed);

  const auto shape = e->shape();
  const auto complement_action =
      LinearMap::from_function(shape, shape, [&](const ModuleVector& x) { return e->act(co_unit, x); });
  const auto kernel = null_space(complement_action.matrix());
  cert.kernel_dimension = kernel.size();

  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e->random_vector(rng);
    const double nx = e->norm(x);
    const auto ai = random_in_ideal(ideal, rng);
    cert.ideal_in_kernel = std::max(cert.ideal_in_kernel,
                                    std::sqrt(norm(q.rho_squared(e->act(ai, x)))) / (1.0 + norm(ai) * nx));

    // y = a1 y1 + a2 y2 with a_j in I.
    auto y = e->act(random_in_ideal(ideal, rng), e->random_vector(rng));
    y += e->act(random_in_ideal(ideal, rng), e->random_vector(rng));
    const double ny = e->norm(y);
    cert.descent = std::max(cert.descent, norm(q.rho_squared(x + y) - q.rho_squared(x)) / (1.0 + nx * nx + ny * ny));

    const double moved = e->norm(x - e->act(unit, x));
    const double rq = norm(q.rho_squared(x));
    cert.unit_identity = std::max(cert.unit_identity, std::abs(moved * moved - rq) / (1.0 + nx * nx));

    if (!kernel.empty()) {
      std::vector<cplx> v(kernel.front().size(), 0.0);
      for (const auto& basis : kernel) {
        const cplx c = rng.complex_normal();
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * basis[j];
      }
      const auto kv = ModuleVector::unflatten(shape, v);
      const double nk = e->norm(kv);
      cert.kernel_rho = std::max(cert.kernel_rho, std::sqrt(norm(q.rho_squared(kv))) / (1.0 + nk));
    }
  }
  return out;
}

inline VerdictReport check_quotient_kernel(const ModulePtr& e, const Ideal& ideal, std::size_t samples,
                                           std::uint64_t seed) {
  const auto res = quotient_module(e, ideal, samples, seed);
  VerdictReport r;
  r.claim = "quotient_kernel";
  r.max_residual = res.certificate.max_residual();
  r.tolerance = QuotientKernelCertificate::kKernelTol;
  r.status = res.certificate.passed() ? Status::Pass : Status::Fail;
  r.samples = samples;
  r.seed = seed;
  r.module = e->family();
  r.note = "ideal " + json(ideal.blocks()).dump() + " certificate " + res.certificate.to_json().dump();
  if (!r.passed()) r.witness = json{{"kind", "quotient_kernel"}, {"certificate", res.certificate.to_json()}};
  return r;
}

/// Sampled check that a -> (a + J, a + I) is an isometric *-isomorphism onto
/// the pullback and that compatible pairs lift exactly.
inline VerdictReport check_ideal_decomposition(const FdAlgebra& a, std::size_t samples, std::uint64_t seed) {
  const auto dec = decompose_ideals(a);
  Rng rng(seed);
  VerdictReport r;
  r.claim = "ideal_decomposition";
  r.tolerance = 1e-10;
  r.samples = samples;
  r.seed = seed;
  const auto& sigma = dec.to_pullback;
  const auto inverse = sigma.inverse();
  const auto& p = dec.pullback;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = random_element(a, rng), y = random_element(a, rng);
    const auto sx = sigma(x), sy = sigma(y);
    const double scale = 1.0 + norm(x) * norm(y);
    r.max_residual = std::max(r.max_residual, std::abs(norm(sx) - norm(x)) / (1.0 + norm(x)));
    r.max_residual = std::max(r.max_residual, norm(sigma(x * y) - sx * sy) / scale);
    r.max_residual = std::max(r.max_residual, norm(sigma(adjoint(x)) - adjoint(sx)) / (1.0 + norm(x)));
    const auto [c1, c2] = p.split(sx);
    const auto lifted = inverse(p.make(c1, c2));
    const auto [d1, d2] = p.split(sigma(lifted));
    r.max_residual = std::max(r.max_residual, frobenius(d1 - c1) + frobenius(d2 - c2));
  }
  r.status = (r.max_residual <= r.tolerance && dec.disjoint && dec.commutative_quotient) ? Status::Pass : Status::Fail;
  r.module = "algebra " + a.to_string();
  r.note = "X has " + std::to_string(dec.points.size()) + " points, B = " + dec.quotient.to_string() +
           ", Y has " + std::to_string(dec.glue_points.size()) + " points";
  return r;
}

/// Zero if the base is the zero algebra or rho vanishes on every sample.
inline bool is_zero_module(const FinslerModule& e, std::size_t samples, std::uint64_t seed) {
  if (e.base().is_zero() || e.flat_dim() == 0) return true;
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i)
    if (norm(e.rho_squared(e.random_vector(rng))) > 1e-12) return false;
  return true;
}

struct StructureDecomposition {
  IdealDecomposition ideals;
  ModulePtr over_points;     // E / JE over C(X)
  ModulePtr hilbert_part;    // E / IE over B
  ModulePtr glue_part;       // E / (I + J) E over C(Y)
  HilbertizeResult hilbert_inner;
  HilbertizeResult glue_inner;
  CanonicalDecomposition canonical;
  bool points_zero = false;
  bool hilbert_zero = false;
  bool glue_zero = false;
  double round_trip = 0.0;  // worst | ||map(x)|| - ||x|| | on samples

  double max_residual() const {
    return std::max({round_trip, canonical.rho_residual, canonical.norm_residual, canonical.module_map_residual,
                     canonical.surjectivity_residual});
  }

  json summary() const {
    return json{{"algebra", ideals.pullback.algebra().dims()},
                {"points", ideals.points},
                {"quotient", algebra_to_json(ideals.quotient)},
                {"glue_points", ideals.glue_points},
                {"E1_zero", points_zero},
                {"E2_zero", hilbert_zero},
                {"E0_zero", glue_zero},
                {"E2_hilbert", to_string(hilbert_inner.status)},
                {"E0_hilbert", to_string(glue_inner.status)},
                {"round_trip", round_trip},
                {"rho_residual", canonical.rho_residual},
                {"module_map_residual", canonical.module_map_residual},
                {"surjectivity_residual", canonical.surjectivity_residual}};
  }
};

/// E as E1 (+)_{E0} E2 with E1 over the points of the commutative ideal and
/// E2, E0 Hilbert. Throws HilbertizeRefused if E2 is not Hilbert.
inline StructureDecomposition structure_decompose(const ModulePtr& e, std::size_t samples, std::uint64_t seed) {
  StructureDecomposition s;
  s.ideals = decompose_ideals(e->base());
  const auto& p = s.ideals.pullback;
  const ModulePtr over_pullback = std::make_shared<TransportedModule>(e, s.ideals.to_pullback.inverse());
  s.canonical = canonical_decompose(over_pullback, p, samples, seed);
  s.over_points = s.canonical.left;
  s.hilbert_part = s.canonical.right;
  s.glue_part = s.canonical.glue;

  s.hilbert_inner = hilbertize(s.hilbert_part, samples, seed + 1);
  if (s.hilbert_inner.status == Status::Fail) {
    throw Error(ErrorKind::HilbertizeRefused, "E/IE fails the parallelogram law (defect " +
                                                  std::to_string(s.hilbert_inner.max_defect) + ")");
  }
  s.glue_inner = hilbertize(s.glue_part, samples, seed + 2);
  s.points_zero = is_zero_module(*s.over_points, 8, seed);
  s.hilbert_zero = is_zero_module(*s.hilbert_part, 8, seed);
  s.glue_zero = is_zero_module(*s.glue_part, 8, seed);

  Rng rng(seed + 3);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = e->random_vector(rng);
    s.round_trip = std::max(s.round_trip, std::abs(s.canonical.reglued->norm(s.canonical.map(x)) - e->norm(x)));
  }
  return s;
}

inline VerdictReport check_structure_decomposition(const ModulePtr& e, std::size_t samples, std::uint64_t seed) {
  VerdictReport r;
  r.claim = "structure_decomposition";
  r.tolerance = CanonicalDecomposition::kTol;
  r.samples = samples;
  r.seed = seed;
  r.module = e->family();
  try {
    const auto s = structure_decompose(e, samples, seed);
    r.max_residual = s.max_residual();
    const bool hilbert_ok = s.hilbert_inner.accepted() && s.glue_inner.accepted() &&
                            s.hilbert_inner.certificate.max() <= HilbertizeResult::kCertificateTol;
    r.status = (r.max_residual <= r.tolerance && hilbert_ok && s.glue_zero) ? Status::Pass : Status::Fail;
    r.note = s.summary().dump();
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::HilbertizeRefused) throw;
    r.status = Status::Fail;
    r.max_residual = std::numeric_limits<double>::infinity();
    r.note = err.what();
  }
  return r;
}

}  // namespace finsler
