#pragma once

#include <cstdint>
#include <stdexcept>

#include "projqm/frame_function.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"

namespace projqm {

/// Re-quantization distribution for states: S(p) = (n+1) p - I.
/// Unit trace; smearing a Liouville density against it recovers the state.
inline HermitianOperator state_kernel(const ProjectivePoint& p) {
  const Index n = p.dim();
  return HermitianOperator(double(n + 1) * p.projector() -
                           ComplexMatrix::Identity(n, n));
}

/// Re-quantization distribution for observables at the given kappa:
/// O(p) = ((n+1)/kappa) p - ((n+1-kappa)/(kappa n)) I.
/// At kappa = n+1 this is just p.
inline HermitianOperator observable_kernel(const ProjectivePoint& p,
                                           double kappa) {
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = p.dim();
  return HermitianOperator(
      (double(n + 1) / kappa) * p.projector() -
      ((double(n + 1) - kappa) / (kappa * double(n))) *
          ComplexMatrix::Identity(n, n));
}

/// A Monte-Carlo operator estimate with per-entry standard errors.
struct OperatorEstimate {
  ComplexMatrix estimate;
  RealMatrix entry_std_error;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  /// Aggregate error sqrt(sum of squared per-entry standard errors); an
  /// estimate of the Hilbert-Schmidt deviation scale.
  double propagated_error() const {
    return std::sqrt(entry_std_error.array().square().sum());
  }
};

namespace detail {

struct MatrixAccumulator {
  std::uint64_t count = 0;
  ComplexMatrix mean;
  RealMatrix m2;

  explicit MatrixAccumulator(Index n)
      : mean(ComplexMatrix::Zero(n, n)), m2(RealMatrix::Zero(n, n)) {}

  void add(const ComplexMatrix& x) {
    ++count;
    const ComplexMatrix delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += (delta.conjugate().cwiseProduct(x - mean)).real();
  }

  static MatrixAccumulator merged(const MatrixAccumulator& a,
                                  const MatrixAccumulator& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    MatrixAccumulator out(a.mean.rows());
    out.count = a.count + b.count;
    const ComplexMatrix delta = b.mean - a.mean;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    out.mean = a.mean + delta * (nb / (na + nb));
    out.m2 = a.m2 + b.m2 +
             delta.cwiseAbs2().eval() * (na * nb / (na + nb));
    return out;
  }
};

template <class Weight, class Kernel>
OperatorEstimate mc_smear(Index n, Weight&& weight, Kernel&& kernel,
                          std::uint64_t n_samples, std::uint64_t seed,
                          std::uint64_t n_shards) {
  if (n_samples == 0)
    throw std::invalid_argument("reconstruction needs n_samples > 0");
  if (n_shards == 0 || n_shards > n_samples) n_shards = 1;
  MatrixAccumulator total(n);
  const std::uint64_t per = n_samples / n_shards;
  std::uint64_t begin = 0;
  for (std::uint64_t s = 0; s < n_shards; ++s) {
    const std::uint64_t end = (s + 1 == n_shards) ? n_samples : begin + per;
    MatrixAccumulator acc(n);
    for (std::uint64_t i = begin; i < end; ++i) {
      const ProjectivePoint p = sample_haar(n, seed, i);
      acc.add(weight(p) * kernel(p));
    }
    total = MatrixAccumulator::merged(total, acc);
    begin = end;
  }
  const double mass = static_cast<double>(n);
  OperatorEstimate out;
  out.estimate = mass * total.mean;
  out.estimate = (out.estimate + out.estimate.adjoint().eval()) / 2.0;
  const double denom =
      total.count > 1 ? double(total.count - 1) * double(total.count) : 1.0;
  out.entry_std_error = mass * (total.m2 / denom).cwiseSqrt();
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

}  // namespace detail

/// Monte-Carlo re-quantization of a Liouville density:
/// sigma = int rho(p) S(p) dnu(p), estimated with the mass-n measure.
/// The estimate is Hermitian by construction but not projected onto the
/// density cone; see nearest_density for the optional projection.
inline OperatorEstimate mc_reconstruct_state(const LiouvilleDensity& rho,
                                             std::uint64_t n_samples,
                                             std::uint64_t seed,
                                             std::uint64_t n_shards = 1) {
  const Index n = rho.dim();
  return detail::mc_smear(
      n, [&rho](const ProjectivePoint& p) { return rho(p); },
      [n](const ProjectivePoint& p) -> ComplexMatrix {
        return double(n + 1) * p.projector() - ComplexMatrix::Identity(n, n);
      },
      n_samples, seed, n_shards);
}

/// Monte-Carlo re-quantization of an observable function:
/// A = int f_A(p) O(p) dnu(p).
inline OperatorEstimate mc_reconstruct_observable(const FrameFunction& f,
                                                  double kappa,
                                                  std::uint64_t n_samples,
                                                  std::uint64_t seed,
                                                  std::uint64_t n_shards = 1) {
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = f.dim();
  const double c_p = double(n + 1) / kappa;
  const double c_i = (double(n + 1) - kappa) / (kappa * double(n));
  return detail::mc_smear(
      n, [&f](const ProjectivePoint& p) { return f.real_at(p); },
      [n, c_p, c_i](const ProjectivePoint& p) -> ComplexMatrix {
        return c_p * p.projector() - c_i * ComplexMatrix::Identity(n, n);
      },
      n_samples, seed, n_shards);
}

/// Nearest density matrix to a Hermitian estimate: clip negative eigenvalues
/// and renormalize the trace. Reported as a flagged projection, never applied
/// silently.
inline DensityMatrix nearest_density(const ComplexMatrix& estimate) {
  HermitianOperator h((estimate + estimate.adjoint()) / 2.0, 1e-6);
  EigenDecomposition eig = eigen_decomposition(h);
  RealVector clipped = eig.eigenvalues.cwiseMax(0.0);
  const double total = clipped.sum();
  if (total <= 0)
    throw std::invalid_argument("nearest_density: estimate has no positive part");
  clipped /= total;
  ComplexMatrix sigma = eig.eigenvectors *
                        clipped.asDiagonal().toDenseMatrix().cast<Complex>() *
                        eig.eigenvectors.adjoint();
  sigma = (sigma + sigma.adjoint()) / 2.0;
  return DensityMatrix(sigma);
}

}  // namespace projqm
