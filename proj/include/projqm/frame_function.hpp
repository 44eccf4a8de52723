#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"

namespace projqm {

/// An element of F^2(H_n): a square-integrable frame function, represented by
/// its unique backing operator B through f(p) = tr(B p). Requires dim > 2,
/// where the representation is a bijection. `kappa` records the inverse
/// quantization convention that produced the function (default n+1).
class FrameFunction {
 public:
  FrameFunction(ComplexMatrix backing, double kappa)
      : backing_(std::move(backing)), kappa_(kappa) {
    validate();
  }

  FrameFunction(ComplexMatrix backing, double kappa, Dims dims)
      : backing_(std::move(backing)), kappa_(kappa), dims_(dims) {
    validate();
    if (dims.total() != backing_.rows())
      throw std::invalid_argument("frame function dims do not match backing");
  }

  Index dim() const { return backing_.rows(); }
  double kappa() const { return kappa_; }
  const ComplexMatrix& backing() const { return backing_; }
  const std::optional<Dims>& dims() const { return dims_; }

  Complex operator()(const ProjectivePoint& p) const {
    return p.vector().dot(backing_ * p.vector());
  }

  double real_at(const ProjectivePoint& p) const { return (*this)(p).real(); }

  bool is_real_valued(double tol = kHermitianTol) const {
    return is_hermitian(backing_, tol);
  }

  /// The frame weight W_F: the common value of sum_{p in basis} f(p).
  Complex frame_weight() const { return backing_.trace(); }

 private:
  void validate() const {
    if (!is_square(backing_))
      throw std::invalid_argument("frame function backing must be square");
    if (backing_.rows() < 3)
      throw std::invalid_argument(
          "frame functions require dimension > 2 (operator correspondence "
          "fails otherwise)");
    if (kappa_ <= 0) throw std::invalid_argument("kappa must be positive");
  }

  ComplexMatrix backing_;
  double kappa_;
  std::optional<Dims> dims_;
};

/// Inverse quantization of an observable:
/// f_A(p) = kappa tr(A p) + ((1 - kappa)/n) tr(A), so the backing operator is
/// kappa A + ((1 - kappa)/n) tr(A) I. With kappa = n+1 this is
/// f_A(p) = (n+1) tr(A p) - tr(A).
inline FrameFunction observable_to_function(const HermitianOperator& a,
                                            double kappa) {
  const Index n = a.dim();
  if (n < 3)
    throw std::invalid_argument("observable_to_function requires dim > 2");
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  ComplexMatrix backing =
      kappa * a.matrix() +
      ((1.0 - kappa) / double(n)) * a.matrix().trace() *
          ComplexMatrix::Identity(n, n);
  return FrameFunction(std::move(backing), kappa);
}

inline FrameFunction observable_to_function(const HermitianOperator& a,
                                            double kappa, const Dims& dims) {
  FrameFunction f = observable_to_function(a, kappa);
  return FrameFunction(f.backing(), kappa, dims);
}

/// Linear extension of the kappa = n+1 state map to all operators:
/// S(X)(p) = tr(X p), i.e. the backing operator is X itself.
inline FrameFunction s_map(const ComplexMatrix& x) {
  return FrameFunction(x, double(x.rows() + 1));
}

inline FrameFunction s_map(const ComplexMatrix& x, const Dims& dims) {
  return FrameFunction(x, double(x.rows() + 1), dims);
}

/// The Liouville density of a state in the adopted kappa = n+1 convention:
/// rho(p) = tr(sigma p), a probability density for the mass-n measure.
class LiouvilleDensity {
 public:
  explicit LiouvilleDensity(const DensityMatrix& sigma)
      : state_(sigma), function_(s_map(sigma.matrix())) {}

  LiouvilleDensity(const DensityMatrix& sigma, const Dims& dims)
      : state_(sigma), function_(s_map(sigma.matrix(), dims)) {}

  Index dim() const { return state_.dim(); }
  const DensityMatrix& state() const { return state_; }
  const FrameFunction& function() const { return function_; }
  const std::optional<Dims>& dims() const { return function_.dims(); }

  double operator()(const ProjectivePoint& p) const {
    return function_.real_at(p);
  }

 private:
  DensityMatrix state_;
  FrameFunction function_;
};

inline LiouvilleDensity state_to_density(const DensityMatrix& sigma) {
  if (sigma.dim() < 3)
    throw std::invalid_argument("state_to_density requires dim > 2");
  return LiouvilleDensity(sigma);
}

inline LiouvilleDensity state_to_density(const DensityMatrix& sigma,
                                         const Dims& dims) {
  return LiouvilleDensity(sigma, dims);
}

/// Generic-kappa state density:
/// rho_sigma(p) = (n(n+1)/kappa) tr(sigma p) + (kappa - (n+1))/kappa.
/// This form pairs with the probability measure; at kappa = n+1 it reduces to
/// n tr(sigma p), which the adopted convention absorbs into the mass-n
/// measure instead.
inline FrameFunction state_to_density_function(const DensityMatrix& sigma,
                                               double kappa) {
  const Index n = sigma.dim();
  if (n < 3)
    throw std::invalid_argument("state_to_density_function requires dim > 2");
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  ComplexMatrix backing =
      (double(n) * double(n + 1) / kappa) * sigma.matrix() +
      ((kappa - double(n + 1)) / kappa) * ComplexMatrix::Identity(n, n);
  return FrameFunction(std::move(backing), kappa);
}

/// Inverse of the linearly extended observable map at the given kappa:
/// X = (B - ((1 - kappa)/n) tr(B) I) / kappa for backing B.
inline ComplexMatrix operator_from_function(const FrameFunction& f,
                                            double kappa) {
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = f.dim();
  return (f.backing() - ((1.0 - kappa) / double(n)) * f.backing().trace() *
                            ComplexMatrix::Identity(n, n)) /
         kappa;
}

inline HermitianOperator observable_from_function(const FrameFunction& f,
                                                  double kappa) {
  return HermitianOperator(operator_from_function(f, kappa), 1e-9);
}

/// Inverse of the state map. For kappa = n+1 the backing operator is the
/// state itself; for generic kappa the affine form of the density map is
/// inverted on its domain (unit-trace states).
inline ComplexMatrix state_matrix_from_density(const FrameFunction& f,
                                               double kappa) {
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = f.dim();
  if (kappa == double(n + 1)) return f.backing();
  return (kappa * f.backing() -
          (kappa - double(n + 1)) * ComplexMatrix::Identity(n, n)) /
         (double(n) * double(n + 1));
}

inline DensityMatrix state_from_density(const FrameFunction& f, double kappa) {
  return DensityMatrix(state_matrix_from_density(f, kappa));
}

/// Exact integral with the mass-n Liouville measure:
/// int f dnu = tr(backing).
inline Complex exact_integral(const FrameFunction& f) {
  return f.backing().trace();
}

/// Exact L^2 inner product with the mass-n measure:
/// int conj(f) g dnu = (tr(A^dagger B) + tr(A^dagger) tr(B)) / (n+1).
inline Complex exact_l2_inner(const FrameFunction& f, const FrameFunction& g) {
  if (f.dim() != g.dim())
    throw std::invalid_argument("exact_l2_inner: dimension mismatch");
  const double np1 = double(f.dim() + 1);
  return (hs_inner(f.backing(), g.backing()) +
          std::conj(f.backing().trace()) * g.backing().trace()) /
         np1;
}

inline double exact_l2_norm(const FrameFunction& f) {
  return std::sqrt(std::max(exact_l2_inner(f, f).real(), 0.0));
}

inline double l2_distance(const FrameFunction& f, const FrameFunction& g) {
  FrameFunction diff(f.backing() - g.backing(), f.kappa());
  return exact_l2_norm(diff);
}

struct PurityVerdict {
  bool pure = false;
  double squared_norm = 0.0;
};

/// A Liouville density describes a pure state iff its squared L^2 norm equals
/// 2/(n+1).
inline PurityVerdict purity_check(const LiouvilleDensity& rho,
                                  double tol = 1e-10) {
  PurityVerdict v;
  v.squared_norm = exact_l2_inner(rho.function(), rho.function()).real();
  v.pure = std::abs(v.squared_norm - 2.0 / double(rho.dim() + 1)) <= tol;
  return v;
}

/// Monte-Carlo counterpart of the purity integral int |rho|^2 dnu.
inline MCEstimate purity_mc(const LiouvilleDensity& rho,
                            std::uint64_t n_samples, std::uint64_t seed) {
  return mc_integrate(
      [&rho](const ProjectivePoint& p) {
        const double v = rho(p);
        return v * v;
      },
      rho.dim(), MeasureConvention{Measure::liouville}, n_samples, seed);
}

/// Star product in the adopted kappa = n+1 convention:
/// f * g = O(O^{-1}(f) O^{-1}(g)). The operator route is exact.
inline FrameFunction star_product(const FrameFunction& f,
                                  const FrameFunction& g) {
  if (f.dim() != g.dim())
    throw std::invalid_argument("star_product: dimension mismatch");
  const Index n = f.dim();
  const double kappa = double(n + 1);
  const ComplexMatrix a = operator_from_function(f, kappa);
  const ComplexMatrix b = operator_from_function(g, kappa);
  const ComplexMatrix ab = a * b;
  ComplexMatrix backing =
      kappa * ab - ab.trace() * ComplexMatrix::Identity(n, n);
  return FrameFunction(std::move(backing), kappa);
}

/// C*-norm |||f||| = operator norm of O^{-1}(f).
inline double cstar_norm(const FrameFunction& f) {
  const ComplexMatrix a = operator_from_function(f, f.kappa());
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Poisson bracket of S-type frame functions with backings tau, tau':
/// {f, g} = -i S([tau, tau']). Antisymmetric; real for real inputs.
inline FrameFunction poisson_bracket(const FrameFunction& f,
                                     const FrameFunction& g) {
  if (f.dim() != g.dim())
    throw std::invalid_argument("poisson_bracket: dimension mismatch");
  const ComplexMatrix comm =
      f.backing() * g.backing() - g.backing() * f.backing();
  return FrameFunction(Complex(0, -1) * comm, double(f.dim() + 1));
}

/// Pointwise scalar product of differentials induced by the Fubini-Study
/// metric, realized through the operator identity
/// G(df, dg)(p) = S(tau tau' + tau' tau)(p) - 2 f(p) g(p).
class MetricPairing {
 public:
  MetricPairing(FrameFunction f, FrameFunction g)
      : f_(std::move(f)),
        g_(std::move(g)),
        sym_(f_.backing() * g_.backing() + g_.backing() * f_.backing()) {
    if (f_.dim() != g_.dim())
      throw std::invalid_argument("metric_pairing: dimension mismatch");
  }

  double operator()(const ProjectivePoint& p) const {
    const Complex s = p.vector().dot(sym_ * p.vector());
    return s.real() - 2.0 * f_.real_at(p) * g_.real_at(p);
  }

 private:
  FrameFunction f_, g_;
  ComplexMatrix sym_;
};

inline MetricPairing metric_pairing(const FrameFunction& f,
                                    const FrameFunction& g) {
  return MetricPairing(f, g);
}

struct PairingResult {
  double exact = 0.0;
  MCEstimate mc;
};

/// The expectation identity <A>_sigma = int f_A rho_sigma dnu, valid for any
/// kappa > 0. The adopted kappa = n+1 pairing integrates rho(p) = tr(sigma p)
/// against the mass-n measure; generic kappa pairs the un-renormalized
/// density with the probability measure.
inline PairingResult expectation_pairing(const HermitianOperator& a,
                                         const DensityMatrix& sigma,
                                         double kappa, std::uint64_t n_samples,
                                         std::uint64_t seed) {
  if (a.dim() != sigma.dim())
    throw std::invalid_argument("expectation_pairing: dimension mismatch");
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = a.dim();
  PairingResult out;
  out.exact = (a.matrix() * sigma.matrix()).trace().real();
  const FrameFunction f = observable_to_function(a, kappa);
  if (kappa == double(n + 1)) {
    const LiouvilleDensity rho = state_to_density(sigma);
    out.mc = mc_integrate(
        [&](const ProjectivePoint& p) { return f.real_at(p) * rho(p); }, n,
        MeasureConvention{Measure::liouville}, n_samples, seed);
  } else {
    const FrameFunction rho = state_to_density_function(sigma, kappa);
    out.mc = mc_integrate(
        [&](const ProjectivePoint& p) { return f.real_at(p) * rho.real_at(p); },
        n, MeasureConvention{Measure::probability}, n_samples, seed);
  }
  return out;
}

struct ObservableFit {
  bool accepted = false;
  double max_residual = 0.0;
  ComplexMatrix reconstructed;
};

/// Decide whether sampled values come from some f = O(A) by least-squares
/// reconstruction of A over the Hermitian basis, accepting when the worst
/// residual stays under `tol`.
inline ObservableFit fit_observable(
    const std::vector<std::pair<ProjectivePoint, double>>& samples,
    double kappa, double tol = 1e-6) {
  if (samples.empty()) throw std::invalid_argument("fit_observable: no samples");
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  const Index n = samples.front().first.dim();
  const Index n2 = n * n;
  if (static_cast<Index>(samples.size()) < n2)
    throw std::invalid_argument(
        "fit_observable: underdetermined sample set (need at least n^2 points)");
  const std::vector<ComplexMatrix> basis = hermitian_basis(n);
  RealMatrix design(samples.size(), n2);
  RealVector rhs(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const ComplexVector& psi = samples[r].first.vector();
    for (Index a = 0; a < n2; ++a) {
      const double tr_gp = psi.dot(basis[a] * psi).real();
      const double tr_g = basis[a].trace().real();
      design(static_cast<Index>(r), a) =
          kappa * tr_gp + (1.0 - kappa) / double(n) * tr_g;
    }
    rhs(static_cast<Index>(r)) = samples[r].second;
  }
  Eigen::ColPivHouseholderQR<RealMatrix> qr(design);
  if (qr.rank() < n2)
    throw std::invalid_argument(
        "fit_observable: underdetermined sample set (design rank " +
        std::to_string(qr.rank()) + " < " + std::to_string(n2) + ")");
  const RealVector coeffs = qr.solve(rhs);
  ObservableFit fit;
  fit.max_residual = (design * coeffs - rhs).cwiseAbs().maxCoeff();
  fit.accepted = fit.max_residual <= tol;
  fit.reconstructed = ComplexMatrix::Zero(n, n);
  for (Index a = 0; a < n2; ++a) fit.reconstructed += coeffs(a) * basis[a];
  return fit;
}

}  // namespace projqm
