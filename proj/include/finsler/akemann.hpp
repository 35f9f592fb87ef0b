#pragma once

// ||b - c|| = sup { | ||aba|| - ||aca|| | : a >= 0, ||a|| <= 1 } for positive b, c.
// In a block algebra the supremum is attained at a rank-one projection
// onto a top eigenvector of b - c.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "finsler/algebra.hpp"
#include "finsler/json_io.hpp"

namespace finsler {

struct GapWitness {
  AlgElement a;
  double achieved_gap = 0.0;
  double target = 0.0;
  std::size_t evaluations = 0;

  double error() const { return std::abs(achieved_gap - target); }

  json to_json() const {
    return json{{"a", element_to_json(a)}, {"achieved_gap", achieved_gap}, {"target", target}};
  }
};

inline double gap(const AlgElement& a, const AlgElement& b, const AlgElement& c) {
  return std::abs(norm(a * b * a) - norm(a * c * a));
}

inline void require_positive_pair(const AlgElement& b, const AlgElement& c) {
  b.require_same_algebra(c);
  for (const auto* x : {&b, &c}) {
    const auto p = is_positive(*x);
    if (!p.positive) {
      throw Error(ErrorKind::NotPositive, "gap argument not positive in block " + std::to_string(p.block.value_or(0)) +
                                              " (eigenvalue " + std::to_string(p.eigenvalue) + ")");
    }
  }
}

/// Rank-one spectral projection attaining the supremum.
inline GapWitness akemann_gap_witness(const AlgElement& b, const AlgElement& c) {
  require_positive_pair(b, c);
  const auto d = b - c;
  GapWitness w{AlgElement::zero(b.algebra()), 0.0, 0.0, 1};
  double best = -1.0;
  std::size_t best_block = 0;
  std::vector<cplx> xi;
  for (std::size_t k = 0; k < d.num_blocks(); ++k) {
    CMatrix dk = d.block(k);
    dk = (dk + dk.adjoint()) * 0.5;
    const auto eig = herm_eig(dk);
    const std::size_t n = eig.values.size();
    for (std::size_t i : {std::size_t{0}, n - 1}) {
      if (std::abs(eig.values[i]) > best) {
        best = std::abs(eig.values[i]);
        best_block = k;
        xi = eig.vectors.column_vector(i);
      }
    }
  }
  if (best < 0.0) return w;
  w.target = best;
  w.a.block(best_block) = CMatrix::outer(xi, xi);
  w.achieved_gap = gap(w.a, b, c);
  return w;
}

/// Projects a Hermitian matrix onto {0 <= a <= 1} by clamping eigenvalues.
inline CMatrix clamp_to_unit_interval(const CMatrix& h) {
  CMatrix s = (h + h.adjoint()) * 0.5;
  return spectral_apply(herm_eig(s), [](double v) { return std::clamp(v, 0.0, 1.0); });
}

struct GapSearchOptions {
  std::size_t iterations = 10000;
  std::size_t restarts = 10;
  double initial_step = 0.3;
  double min_step = 1e-9;
  double explore_fraction = 0.4;  // share of the budget before rounding to projections
};

namespace detail {

inline AlgElement rank_one(const FdAlgebra& alg, std::size_t k, const std::vector<cplx>& v) {
  auto a = AlgElement::zero(alg);
  a.block(k) = CMatrix::outer(v, v);
  return a;
}

inline void normalize(std::vector<cplx>& v) {
  double s = 0.0;
  for (auto z : v) s += std::norm(z);
  s = std::sqrt(s);
  for (auto& z : v) z /= s;
}

}  // namespace detail

/// Derivative-free ascent over the positive unit ball. A first phase climbs
/// from random PSD contractions with eigenvalue clamping; a second phase
/// rounds to rank-one projections in each block and climbs along unit vectors. Every iterate is feasible, so the
/// achieved gap never exceeds the target.
inline GapWitness akemann_gap_search(const AlgElement& b, const AlgElement& c, std::uint64_t seed,
                                     const GapSearchOptions& opt = {}) {
  require_positive_pair(b, c);
  const FdAlgebra& alg = b.algebra();
  GapWitness best{AlgElement::zero(alg), 0.0, norm(b - c), 0};
  if (alg.is_zero() || opt.iterations == 0) return best;
  Rng rng(seed);
  const std::size_t explore = static_cast<std::size_t>(opt.explore_fraction * static_cast<double>(opt.iterations));
  const std::size_t restarts = std::max<std::size_t>(1, std::min(opt.restarts, explore));
  const std::size_t per_restart = explore / restarts;

  auto offer = [&](const AlgElement& a, double value) {
    if (value > best.achieved_gap) {
      best.achieved_gap = value;
      best.a = a;
    }
  };

  for (std::size_t r = 0; r < restarts; ++r) {
    auto a = AlgElement::zero(alg);
    for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
      auto g = random_gaussian(alg.dim(k), alg.dim(k), rng);
      auto p = g * g.adjoint();
      const double n = op_norm(p);
      a.block(k) = clamp_to_unit_interval(n > 0 ? p * (1.0 / n) : p);
    }
    double value = gap(a, b, c);
    ++best.evaluations;
    double step = opt.initial_step;
    for (std::size_t it = 1; it < per_restart && step > opt.min_step; ++it) {
      auto trial = a;
      for (std::size_t k = 0; k < alg.num_blocks(); ++k) {
        auto h = random_gaussian(alg.dim(k), alg.dim(k), rng);
        trial.block(k) = clamp_to_unit_interval(a.block(k) + (h + h.adjoint()) * (0.5 * step));
      }
      const double v = gap(trial, b, c);
      ++best.evaluations;
      if (v > value) {
        a = std::move(trial);
        value = v;
        step *= 1.5;
      } else {
        step *= 0.85;
      }
    }
    offer(a, value);
  }

  // Rounding phase: on a rank-one point the gap is |<xi, (b - c) xi>|, whose
  // absolute value has a spurious local maximum at the opposite end of the
  // spectrum. Each sign of ||a b a|| - ||a c a|| is climbed separately.
  const AlgElement seed_point = best.a;
  const std::size_t remaining = opt.iterations > best.evaluations ? opt.iterations - best.evaluations : 0;
  const std::size_t per_climb = remaining / (2 * alg.num_blocks());
  for (std::size_t k = 0; k < alg.num_blocks() && per_climb > 0; ++k) {
    const std::size_t n = alg.dim(k);
    for (const double sign : {1.0, -1.0}) {
      auto signed_gap = [&](const std::vector<cplx>& v) {
        const auto a = detail::rank_one(alg, k, v);
        return sign * (norm(a * b * a) - norm(a * c * a));
      };
      std::vector<cplx> v;
      if (sign > 0 && seed_point.block(k).max_abs() > 0.0) {
        v = herm_eig(seed_point.block(k)).vectors.column_vector(0);
      } else {
        v.resize(n);
        for (auto& z : v) z = rng.complex_normal();
        detail::normalize(v);
      }
      double value = signed_gap(v);
      ++best.evaluations;
      double step = opt.initial_step;
      for (std::size_t it = 1; it < per_climb && step > opt.min_step; ++it) {
        auto trial = v;
        for (auto& z : trial) z += rng.complex_normal() * step;
        detail::normalize(trial);
        const double t = signed_gap(trial);
        ++best.evaluations;
        if (t > value) {
          v = std::move(trial);
          value = t;
          step *= 1.5;
        } else {
          step *= 0.85;
        }
      }
      const auto a = detail::rank_one(alg, k, v);
      offer(a, gap(a, b, c));
    }
  }
  return best;
}

}  // namespace finsler
