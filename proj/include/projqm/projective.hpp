#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "projqm/linalg.hpp"
#include "projqm/rng.hpp"

namespace projqm {

/// A point of the projective space P(H_n): a pure state, held as a canonical
/// unit representative vector. The associated rank-1 projector is |psi><psi|.
///
/// The representative is normalized and its first component of significant
/// magnitude is rotated to the positive real axis, so equal rays compare
/// equal entrywise.
class ProjectivePoint {
 public:
  explicit ProjectivePoint(ComplexVector psi) : psi_(std::move(psi)) {
    const double norm = psi_.norm();
    if (!(norm > 0.0) || !psi_.allFinite())
      throw std::invalid_argument("projective point needs a nonzero finite vector");
    psi_ /= norm;
    for (Index i = 0; i < psi_.size(); ++i) {
      const double a = std::abs(psi_(i));
      if (a > 1e-12) {
        psi_ *= std::conj(psi_(i)) / a;
        break;
      }
    }
  }

  Index dim() const { return psi_.size(); }
  const ComplexVector& vector() const { return psi_; }
  ComplexMatrix projector() const { return psi_ * psi_.adjoint(); }

 private:
  ComplexVector psi_;
};

/// Haar-distributed point: a normalized standard complex Gaussian vector.
inline ProjectivePoint sample_haar(Index n, CounterRng& rng) {
  if (n < 2) throw std::invalid_argument("sample_haar requires n >= 2");
  ComplexVector z(n);
  for (Index i = 0; i < n; ++i) {
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    z(i) = Complex(re, im);
  }
  return ProjectivePoint(std::move(z));
}

inline ProjectivePoint sample_haar(Index n, std::uint64_t seed,
                                   std::uint64_t index,
                                   std::uint64_t stream = 0) {
  CounterRng rng(seed, stream, index);
  return sample_haar(n, rng);
}

/// d_2(p, p') = sqrt(2 - 2 |<psi|psi'>|^2); equals sqrt(2) iff orthogonal.
/// Evaluated as the Hilbert-Schmidt distance of the projectors, which is the
/// same quantity without the cancellation the overlap form suffers at nearly
/// coincident points.
inline double d2_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  if (p.dim() != q.dim())
    throw std::invalid_argument("d2_distance: dimension mismatch");
  return (p.projector() - q.projector()).norm();
}

/// Tangent vector at p, carried by a Hermitian generator A: v = -i [A, p].
class TangentVector {
 public:
  TangentVector(ProjectivePoint base, ComplexMatrix generator)
      : base_(std::move(base)), generator_(std::move(generator)) {
    if (generator_.rows() != base_.dim() || generator_.cols() != base_.dim())
      throw std::invalid_argument("tangent generator/base dimension mismatch");
    if (!is_hermitian(generator_, 1e-10))
      throw std::invalid_argument("tangent generator must be Hermitian");
  }

  const ProjectivePoint& base() const { return base_; }
  const ComplexMatrix& generator() const { return generator_; }

  /// The realized tangent matrix -i [A, p].
  ComplexMatrix realized() const {
    const ComplexMatrix p = base_.projector();
    return Complex(0, -1) * (generator_ * p - p * generator_);
  }

 private:
  ProjectivePoint base_;
  ComplexMatrix generator_;
};

namespace detail {
inline void require_shared_base(const TangentVector& u,
                                const TangentVector& v) {
  // canonical representatives make ray equality a vector comparison
  if (u.base().dim() != v.base().dim() ||
      (u.base().vector() - v.base().vector()).norm() > 1e-10)
    throw std::invalid_argument("tangent vectors have different base points");
}
}  // namespace detail

/// omega_p(u, v) = -i kappa tr([A_u, A_v] p). Antisymmetric, real.
inline double symplectic_form(const TangentVector& u, const TangentVector& v,
                              double kappa) {
  detail::require_shared_base(u, v);
  const ComplexMatrix comm =
      u.generator() * v.generator() - v.generator() * u.generator();
  return (Complex(0, -kappa) * (comm * u.base().projector()).trace()).real();
}

/// g_p(u, v) = -kappa tr(([A_u,p][A_v,p] + [A_v,p][A_u,p]) p).
/// Symmetric, positive semi-definite.
inline double fubini_study_metric(const TangentVector& u,
                                  const TangentVector& v, double kappa) {
  detail::require_shared_base(u, v);
  const ComplexMatrix p = u.base().projector();
  const ComplexMatrix cu = u.generator() * p - p * u.generator();
  const ComplexMatrix cv = v.generator() * p - p * v.generator();
  return (-kappa * ((cu * cv + cv * cu) * p).trace()).real();
}

/// The complex structure j_p, oriented so that omega_p(u, v) = g_p(u, j_p v)
/// holds together with the sign conventions of symplectic_form and
/// fubini_study_metric above. Satisfies j_p(j_p(v)) = -v.
inline TangentVector complex_structure(const TangentVector& v) {
  const ComplexMatrix p = v.base().projector();
  const ComplexMatrix a = v.generator();
  // generator -i[A, p] realizes i[p, v] for v = -i[A, p]
  ComplexMatrix gen = Complex(0, -1) * (a * p - p * a);
  gen = (gen + gen.adjoint()) / 2.0;  // clean roundoff
  return TangentVector(v.base(), std::move(gen));
}

/// Which total mass the integration measure carries: the unitarily invariant
/// probability measure (mass 1) or the Liouville convention (mass n).
enum class Measure { probability, liouville };

struct MeasureConvention {
  Measure kind = Measure::liouville;
  double total_mass(Index n) const {
    return kind == Measure::liouville ? static_cast<double>(n) : 1.0;
  }
};

/// A Monte-Carlo integral estimate. std_error is
/// total_mass * sample-std-dev / sqrt(n_samples).
struct MCEstimate {
  Complex value{};
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  double real() const { return value.real(); }
};

/// Streaming mean/variance accumulator (Welford), mergeable across shards.
struct MCAccumulator {
  std::uint64_t count = 0;
  Complex mean{};
  double m2 = 0.0;

  void add(Complex x) {
    ++count;
    const Complex delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += (std::conj(delta) * (x - mean)).real();
  }

  static MCAccumulator merged(const MCAccumulator& a, const MCAccumulator& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    MCAccumulator out;
    out.count = a.count + b.count;
    const Complex delta = b.mean - a.mean;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    out.mean = a.mean + delta * (nb / (na + nb));
    out.m2 = a.m2 + b.m2 + std::norm(delta) * na * nb / (na + nb);
    return out;
  }

  double variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }

  MCEstimate estimate(double mass, std::uint64_t seed) const {
    MCEstimate e;
    e.value = mass * mean;
    e.std_error = mass * std::sqrt(variance() / static_cast<double>(count));
    e.n_samples = count;
    e.seed = seed;
    return e;
  }
};

/// Monte-Carlo integral of f over P(H_n) with the given measure convention:
/// estimate = total_mass * (sample mean of f at Haar points).
///
/// Sample `i` is drawn from the counter-based sub-stream (seed, stream, i),
/// so a shard plan that partitions [0, n_samples) reproduces the same draws;
/// shard results merge in shard order.
template <class F>
MCEstimate mc_integrate(F&& f, Index n, MeasureConvention conv,
                        std::uint64_t n_samples, std::uint64_t seed,
                        std::uint64_t n_shards = 1, std::uint64_t stream = 0) {
  if (n_samples == 0)
    throw std::invalid_argument("mc_integrate: n_samples must be positive");
  if (n_shards == 0 || n_shards > n_samples) n_shards = 1;
  MCAccumulator total;
  const std::uint64_t per = n_samples / n_shards;
  std::uint64_t begin = 0;
  for (std::uint64_t s = 0; s < n_shards; ++s) {
    const std::uint64_t end = (s + 1 == n_shards) ? n_samples : begin + per;
    MCAccumulator acc;
    for (std::uint64_t i = begin; i < end; ++i) {
      const ProjectivePoint p = sample_haar(n, seed, i, stream);
      acc.add(Complex(f(p)));
    }
    total = MCAccumulator::merged(total, acc);
    begin = end;
  }
  return total.estimate(conv.total_mass(n), seed);
}

}  // namespace projqm
