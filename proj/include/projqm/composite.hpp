#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "projqm/frame_function.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"

namespace projqm {

/// A point of the classical-like product phase space P(H) x P(K).
struct ProductPoint {
  ProjectivePoint first;
  ProjectivePoint second;
};

/// Segre embedding P(H) x P(K) -> P(H (x) K): (p1, p2) -> p1 (x) p2, with
/// representative vector psi1 (x) psi2.
inline ProjectivePoint segre(const ProjectivePoint& p1,
                             const ProjectivePoint& p2) {
  if (p1.dim() < 3 || p2.dim() < 3)
    throw std::invalid_argument("segre requires factor dimensions > 2");
  return ProjectivePoint(kron(p1.vector(), p2.vector()));
}

namespace detail {
inline const Dims& require_dims(const FrameFunction& f, const char* op) {
  if (!f.dims())
    throw std::invalid_argument(std::string(op) +
                                ": frame function has no factorization dims");
  return *f.dims();
}
}  // namespace detail

/// Pull-back by the Segre embedding: (I f)(p1, p2) = f(p1 (x) p2).
inline Complex pullback(const FrameFunction& f, const ProductPoint& pp) {
  const Dims& dims = detail::require_dims(f, "pullback");
  if (pp.first.dim() != dims.first || pp.second.dim() != dims.second)
    throw std::invalid_argument("pullback: point/dims mismatch");
  const ComplexVector psi = kron(pp.first.vector(), pp.second.vector());
  return psi.dot(f.backing() * psi);
}

/// The inverse isomorphism J: a finite sum of factorized terms
/// sum_i tr(A_i p1) tr(B_i p2) corresponds to the bipartite frame function
/// with backing sum_i A_i (x) B_i.
inline FrameFunction from_product_expansion(
    const Dims& dims,
    const std::vector<std::pair<ComplexMatrix, ComplexMatrix>>& terms,
    double kappa) {
  ComplexMatrix backing = ComplexMatrix::Zero(dims.total(), dims.total());
  for (const auto& [a, b] : terms) {
    if (a.rows() != dims.first || b.rows() != dims.second)
      throw std::invalid_argument("from_product_expansion: term shape mismatch");
    backing += kron(a, b);
  }
  return FrameFunction(std::move(backing), kappa, dims);
}

/// Diamond product: the frame-function counterpart of the operator tensor
/// product, S(A (x) B) = S_H(A) <> S_K(B). Exact on backing operators.
inline FrameFunction diamond_product(const FrameFunction& rho1,
                                     const FrameFunction& rho2) {
  const Dims dims(rho1.dim(), rho2.dim());
  return FrameFunction(kron(rho1.backing(), rho2.backing()),
                       double(dims.total() + 1), dims);
}

/// Monte-Carlo evaluation of the diamond product at a point through the
/// smearing kernel T(p, p1, p2) = tr[p S_H(p1) (x) S_K(p2)]. A verification
/// path; the algebraic route above is authoritative.
inline MCEstimate diamond_kernel_mc(const FrameFunction& rho1,
                                    const FrameFunction& rho2,
                                    const ProjectivePoint& p,
                                    std::uint64_t n_samples,
                                    std::uint64_t seed) {
  if (n_samples == 0)
    throw std::invalid_argument("diamond_kernel_mc: n_samples must be positive");
  const Index n = rho1.dim(), m = rho2.dim();
  if (p.dim() != n * m)
    throw std::invalid_argument("diamond_kernel_mc: point dimension mismatch");
  const ComplexMatrix big = p.projector();
  MCAccumulator acc;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const ProjectivePoint p1 = sample_haar(n, seed, i, /*stream=*/0);
    const ProjectivePoint p2 = sample_haar(m, seed, i, /*stream=*/1);
    const ComplexMatrix s1 =
        double(n + 1) * p1.projector() - ComplexMatrix::Identity(n, n);
    const ComplexMatrix s2 =
        double(m + 1) * p2.projector() - ComplexMatrix::Identity(m, m);
    const Complex kernel = (big * kron(s1, s2)).trace();
    acc.add(rho1(p1) * rho2(p2) * kernel);
  }
  return acc.estimate(double(n) * double(m), seed);
}

/// Partial integral over the chosen projective factor:
/// rho_K(p1) = int (rho o Seg)(p1, p2) dnu_K(p2). The exact route is the
/// partial trace of the backing operator; the mass-m measure makes the two
/// coincide.
inline FrameFunction partial_integral(const FrameFunction& rho,
                                      Factor integrated) {
  const Dims& dims = detail::require_dims(rho, "partial_integral");
  ComplexMatrix reduced = partial_trace(rho.backing(), dims, integrated);
  return FrameFunction(std::move(reduced), double(reduced.rows() + 1));
}

/// Monte-Carlo partial integral at a fixed point of the remaining factor.
inline MCEstimate partial_integral_mc(const FrameFunction& rho,
                                      Factor integrated,
                                      const ProjectivePoint& at,
                                      std::uint64_t n_samples,
                                      std::uint64_t seed) {
  const Dims& dims = detail::require_dims(rho, "partial_integral_mc");
  const Index n_int =
      integrated == Factor::second ? dims.second : dims.first;
  const Index n_rem =
      integrated == Factor::second ? dims.first : dims.second;
  if (at.dim() != n_rem)
    throw std::invalid_argument("partial_integral_mc: point dimension mismatch");
  return mc_integrate(
      [&](const ProjectivePoint& q) {
        const ComplexVector psi =
            integrated == Factor::second ? kron(at.vector(), q.vector())
                                         : kron(q.vector(), at.vector());
        return psi.dot(rho.backing() * psi);
      },
      n_int, MeasureConvention{Measure::liouville}, n_samples, seed);
}

/// Monte-Carlo integral of rho o Seg over P(H) x P(K) with the product of the
/// mass-n and mass-m measures. By the product-space integration theorem it
/// estimates the big-space integral int rho dnu = tr(backing).
inline MCEstimate product_space_integral(const FrameFunction& rho,
                                         std::uint64_t n_samples,
                                         std::uint64_t seed) {
  if (n_samples == 0)
    throw std::invalid_argument(
        "product_space_integral: n_samples must be positive");
  const Dims& dims = detail::require_dims(rho, "product_space_integral");
  MCAccumulator acc;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const ProjectivePoint p1 = sample_haar(dims.first, seed, i, /*stream=*/0);
    const ProjectivePoint p2 = sample_haar(dims.second, seed, i, /*stream=*/1);
    const ComplexVector psi = kron(p1.vector(), p2.vector());
    acc.add(psi.dot(rho.backing() * psi));
  }
  return acc.estimate(double(dims.first) * double(dims.second), seed);
}

}  // namespace projqm
