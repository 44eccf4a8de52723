#pragma once

#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"
#include "projqm/rng.hpp"

namespace projqm {

inline ComplexMatrix random_complex_matrix(Index rows, Index cols,
                                           CounterRng& rng) {
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
  return m;
}

inline HermitianOperator random_hermitian(Index n, CounterRng& rng) {
  ComplexMatrix m = random_complex_matrix(n, n, rng);
  return HermitianOperator((m + m.adjoint()) / 2.0);
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the standard
/// phase fix on the diagonal of R.
inline ComplexMatrix random_unitary(Index n, CounterRng& rng) {
  ComplexMatrix z = random_complex_matrix(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    const Complex d = r(i, i);
    const double a = std::abs(d);
    q.col(i) *= (a > 0 ? d / a : Complex(1, 0));
  }
  return q;
}

/// Wishart-distributed density of the requested rank.
inline DensityMatrix random_density(Index n, Index rank, CounterRng& rng) {
  if (rank < 1 || rank > n)
    throw std::invalid_argument("random_density: rank out of range");
  ComplexMatrix w = random_complex_matrix(n, rank, rng);
  ComplexMatrix sigma = w * w.adjoint();
  sigma /= sigma.trace().real();
  sigma = (sigma + sigma.adjoint()) / 2.0;
  return DensityMatrix(sigma);
}

inline DensityMatrix random_pure_density(Index n, CounterRng& rng) {
  const ProjectivePoint p = sample_haar(n, rng);
  return DensityMatrix(p.projector());
}

}  // namespace projqm
