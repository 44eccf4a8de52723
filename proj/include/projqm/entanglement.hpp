#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "projqm/composite.hpp"
#include "projqm/frame_function.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"
#include "projqm/random.hpp"
#include "projqm/requantize.hpp"

namespace projqm {

namespace detail {

inline const Dims& require_bipartite(const LiouvilleDensity& rho,
                                     const char* op) {
  if (!rho.dims())
    throw std::invalid_argument(std::string(op) +
                                ": density has no factorization dims");
  return *rho.dims();
}

inline void require_pure(const LiouvilleDensity& rho, const char* op) {
  if (!purity_check(rho, 1e-8).pure)
    throw std::invalid_argument(std::string(op) +
                                ": defined on pure states only");
}

/// E^2 for a pure state vector:
/// tr(Delta^2) / ((n+1)(m+1)) with Delta = |psi><psi| - sigma1 (x) sigma2.
/// Both marginal projections of Delta vanish, which collapses the moment sum
/// to the plain Hilbert-Schmidt term. Delta is formed entrywise; the expanded
/// trace algebra cancels catastrophically near product states.
inline double pure_e_squared(const ComplexVector& psi, const Dims& dims) {
  ComplexMatrix coeff(dims.first, dims.second);
  for (Index i = 0; i < dims.first; ++i)
    for (Index k = 0; k < dims.second; ++k) coeff(i, k) = psi(i * dims.second + k);
  const ComplexMatrix s1 = coeff * coeff.adjoint();
  const ComplexMatrix s2 = coeff.transpose() * coeff.conjugate();
  const ComplexMatrix delta = psi * psi.adjoint() - kron(s1, s2);
  return delta.squaredNorm() /
         (double(dims.first + 1) * double(dims.second + 1));
}

}  // namespace detail

/// The deviation F_rho(p1, p2) = (rho o Seg)(p1, p2) - rho_K(p1) rho_H(p2)
/// of a pure bipartite density from the product of its marginals. Equals
/// tr(Delta (p1 (x) p2)) with Delta = sigma - sigma1 (x) sigma2, and
/// integrates to zero over the product space.
class DeviationFunction {
 public:
  explicit DeviationFunction(const LiouvilleDensity& rho)
      : dims_(detail::require_bipartite(rho, "deviation_function")) {
    detail::require_pure(rho, "deviation_function");
    const ComplexMatrix& sigma = rho.state().matrix();
    const ComplexMatrix s1 = partial_trace(sigma, dims_, Factor::second);
    const ComplexMatrix s2 = partial_trace(sigma, dims_, Factor::first);
    delta_ = sigma - kron(s1, s2);
  }

  double operator()(const ProductPoint& pp) const {
    const ComplexVector psi = kron(pp.first.vector(), pp.second.vector());
    return psi.dot(delta_ * psi).real();
  }

  const ComplexMatrix& delta() const { return delta_; }
  const Dims& dims() const { return dims_; }

 private:
  Dims dims_;
  ComplexMatrix delta_;
};

inline DeviationFunction deviation_function(const LiouvilleDensity& rho) {
  return DeviationFunction(rho);
}

/// Exact standard Hamiltonian entanglement measure of a pure state:
/// E = (int int |F_rho|^2 dnu_H dnu_K)^{1/2}, evaluated in closed form by
/// expanding Delta over Hermitian product bases and applying the exact
/// second-moment integrals on each factor.
inline double entanglement_pure_exact(const LiouvilleDensity& rho) {
  const Dims& dims = detail::require_bipartite(rho, "entanglement_pure_exact");
  detail::require_pure(rho, "entanglement_pure_exact");
  const Index n = dims.first, m = dims.second;
  const ComplexMatrix& sigma = rho.state().matrix();
  const ComplexMatrix s1 = partial_trace(sigma, dims, Factor::second);
  const ComplexMatrix s2 = partial_trace(sigma, dims, Factor::first);
  const ComplexMatrix delta = sigma - kron(s1, s2);

  const std::vector<ComplexMatrix> gs = hermitian_basis(n);
  const std::vector<ComplexMatrix> hs = hermitian_basis(m);
  // c(i, j) = tr((G_i (x) H_j) Delta), contracted blockwise
  RealMatrix c(n * n, m * m);
  for (Index i = 0; i < n * n; ++i) {
    ComplexMatrix w = ComplexMatrix::Zero(m, m);  // w(l,k) contraction
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        if (gs[i](a, b) != Complex(0, 0))
          w += gs[i](a, b) * delta.block(b * m, a * m, m, m).transpose();
    for (Index j = 0; j < m * m; ++j)
      c(i, j) = (hs[j] * w).trace().real();
  }
  // factor moment matrices: (delta_ik + n delta_i0 delta_k0)/(n+1)
  RealMatrix mom_n = RealMatrix::Identity(n * n, n * n);
  mom_n(0, 0) += double(n);
  mom_n /= double(n + 1);
  RealMatrix mom_m = RealMatrix::Identity(m * m, m * m);
  mom_m(0, 0) += double(m);
  mom_m /= double(m + 1);
  const double e2 = (mom_n * c * mom_m * c.transpose()).trace();
  return std::sqrt(std::max(e2, 0.0));
}

/// Monte-Carlo estimate of E^2 over the product Haar measure (independent
/// sub-streams per factor).
inline MCEstimate entanglement_pure_mc(const LiouvilleDensity& rho,
                                       std::uint64_t n_samples,
                                       std::uint64_t seed) {
  if (n_samples == 0)
    throw std::invalid_argument(
        "entanglement_pure_mc: n_samples must be positive");
  const DeviationFunction f(rho);
  const Dims& dims = f.dims();
  MCAccumulator acc;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const ProjectivePoint p1 = sample_haar(dims.first, seed, i, /*stream=*/0);
    const ProjectivePoint p2 = sample_haar(dims.second, seed, i, /*stream=*/1);
    const double v = f(ProductPoint{p1, p2});
    acc.add(v * v);
  }
  return acc.estimate(double(dims.first) * double(dims.second), seed);
}

/// A convex decomposition of a mixed state into pure components.
struct EnsembleDecomposition {
  RealVector weights;                   // positive, summing to 1
  std::vector<ComplexVector> states;    // unit vectors

  ComplexMatrix mixture() const {
    ComplexMatrix out =
        ComplexMatrix::Zero(states.front().size(), states.front().size());
    for (std::size_t i = 0; i < states.size(); ++i)
      out += weights(static_cast<Index>(i)) * states[i] * states[i].adjoint();
    return out;
  }
};

struct RoofOptions {
  int budget = 300;
  std::uint64_t seed = 0;
  std::vector<EnsembleDecomposition> seed_ensembles{};
};

struct RoofResult {
  double upper_bound = 0.0;
  EnsembleDecomposition ensemble;
};

namespace detail {

struct RawEnsemble {
  std::vector<ComplexVector> unnormalized;  // sum of outer products = sigma

  double value(const Dims& dims) const {
    double v = 0.0;
    for (const auto& psi : unnormalized) {
      const double w = psi.squaredNorm();
      if (w < 1e-14) continue;
      v += w * std::sqrt(pure_e_squared(psi / std::sqrt(w), dims));
    }
    return v;
  }

  EnsembleDecomposition normalized() const {
    EnsembleDecomposition out;
    std::vector<double> ws;
    for (const auto& psi : unnormalized) {
      const double w = psi.squaredNorm();
      if (w < 1e-14) continue;
      ws.push_back(w);
      out.states.push_back(psi / std::sqrt(w));
    }
    out.weights = Eigen::Map<RealVector>(ws.data(), ws.size());
    out.weights /= out.weights.sum();
    return out;
  }
};

inline RawEnsemble ensemble_from_isometry(
    const std::vector<ComplexVector>& scaled_eigvecs, const ComplexMatrix& v) {
  const Index r = static_cast<Index>(scaled_eigvecs.size());
  RawEnsemble out;
  out.unnormalized.reserve(v.rows());
  for (Index i = 0; i < v.rows(); ++i) {
    ComplexVector psi = ComplexVector::Zero(scaled_eigvecs.front().size());
    for (Index k = 0; k < r; ++k) psi += v(i, k) * scaled_eigvecs[k];
    out.unnormalized.push_back(std::move(psi));
  }
  return out;
}

/// Random isometry (rows x cols, orthonormal columns), rows >= cols.
inline ComplexMatrix random_isometry(Index rows, Index cols, CounterRng& rng) {
  ComplexMatrix z = random_complex_matrix(rows, cols, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = ComplexMatrix(qr.householderQ()).leftCols(cols);
  return q;
}

}  // namespace detail

/// Convex-roof upper bound for E on a mixed bipartite state.
///
/// Candidate ensembles come from the eigendecomposition of sigma transformed
/// by random isometries (output size up to (nm)^2), interleaved with local
/// pairwise-rotation descent on the best ensemble found so far. The work
/// schedule is a deterministic function of (seed, unit index), so the bound
/// is monotone non-increasing in `budget`. Caller-provided ensembles seed the
/// search. The result is an upper bound on the true roof, exact for pure
/// input.
inline RoofResult entanglement_roof(const DensityMatrix& sigma,
                                    const Dims& dims,
                                    const RoofOptions& opts = {}) {
  if (sigma.dim() != dims.total())
    throw std::invalid_argument("entanglement_roof: state/dims mismatch");
  const Index d = dims.total();
  const Index max_members = d * d;

  const EigenDecomposition eig = eigen_decomposition(sigma.hermitian());
  std::vector<ComplexVector> scaled;  // sqrt(mu_k) e_k
  for (Index k = 0; k < d; ++k)
    if (eig.eigenvalues(k) > 1e-12)
      scaled.push_back(std::sqrt(eig.eigenvalues(k)) *
                       ComplexVector(eig.eigenvectors.col(k)));
  const Index rank = static_cast<Index>(scaled.size());

  detail::RawEnsemble best = detail::ensemble_from_isometry(
      scaled, ComplexMatrix::Identity(rank, rank));
  double best_value = best.value(dims);

  auto consider = [&](const detail::RawEnsemble& cand) {
    const double v = cand.value(dims);
    if (v < best_value) {
      best_value = v;
      best = cand;
    }
  };

  for (const EnsembleDecomposition& seed_ens : opts.seed_ensembles) {
    if (seed_ens.states.empty()) continue;
    ComplexMatrix mix = seed_ens.mixture();
    if (hs_distance(mix, sigma.matrix()) > 1e-9)
      throw std::invalid_argument(
          "entanglement_roof: seed ensemble does not realize the state");
    detail::RawEnsemble raw;
    for (std::size_t i = 0; i < seed_ens.states.size(); ++i)
      raw.unnormalized.push_back(
          std::sqrt(seed_ens.weights(static_cast<Index>(i))) *
          seed_ens.states[i]);
    consider(raw);
  }

  for (int unit = 1; unit < opts.budget; ++unit) {
    CounterRng rng(opts.seed, /*stream=*/900 + static_cast<std::uint64_t>(unit),
                   0);
    if (unit % 2 == 1) {
      // restart: fresh random isometry, output size cycling upward
      const Index sizes[3] = {rank, std::min<Index>(2 * rank, max_members),
                              std::min<Index>(4 * rank, max_members)};
      const Index k = sizes[(unit / 2) % 3];
      consider(detail::ensemble_from_isometry(
          scaled, detail::random_isometry(k, rank, rng)));
    } else {
      // refinement: one random pairwise rotation on the current best
      const std::size_t count = best.unnormalized.size();
      if (count < 2) continue;
      const std::size_t i = rng.next_u64() % count;
      std::size_t j = rng.next_u64() % (count - 1);
      if (j >= i) ++j;
      const double theta = (rng.next_double() - 0.5) * 1.6;
      const double alpha = rng.next_double() * 2.0 * 3.14159265358979323846;
      detail::RawEnsemble cand = best;
      const Complex phase(std::cos(alpha), std::sin(alpha));
      const double ct = std::cos(theta), st = std::sin(theta);
      ComplexVector a = cand.unnormalized[i], b = cand.unnormalized[j];
      cand.unnormalized[i] = ct * a + st * phase * b;
      cand.unnormalized[j] = -st * std::conj(phase) * a + ct * b;
      consider(cand);
    }
  }

  RoofResult out;
  out.upper_bound = best_value;
  out.ensemble = best.normalized();
  return out;
}

struct SeparableDistanceOptions {
  int iterations = 250;   // conditional-gradient steps per restart
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct SeparableDistanceResult {
  double l2_upper = 0.0;  // L^2(nu) distance upper bound (the measure D)
  double hs_upper = 0.0;  // Hilbert-Schmidt distance on backing operators
  ComplexMatrix nearest;  // the separable mixture found
};

namespace detail {

/// Monotone alternating ascent of <phi1 (x) phi2 | M | phi1 (x) phi2> from a
/// given phi2; each pass takes the top eigenvector of the conditioned factor.
inline double product_overlap_ascent(const ComplexMatrix& m_big,
                                     const Dims& dims, ComplexVector& phi1,
                                     ComplexVector& phi2, int sweeps) {
  const Index n = dims.first, m = dims.second;
  double val = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < sweeps; ++s) {
    ComplexMatrix m1 = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        m1(i, j) = phi2.dot(m_big.block(i * m, j * m, m, m) * phi2);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> s1(m1);
    phi1 = s1.eigenvectors().col(n - 1);
    ComplexMatrix m2 = ComplexMatrix::Zero(m, m);
    for (Index k = 0; k < m; ++k)
      for (Index l = 0; l < m; ++l) {
        Complex acc(0, 0);
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j)
            acc += std::conj(phi1(i)) * m_big(i * m + k, j * m + l) * phi1(j);
        m2(k, l) = acc;
      }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> s2(m2);
    const double new_val = s2.eigenvalues()(m - 1);
    phi2 = s2.eigenvectors().col(m - 1);
    if (std::abs(new_val - val) < 1e-14 && s > 2) return new_val;
    val = new_val;
  }
  return val;
}

/// Approximate max of <phi1 (x) phi2 | M | phi1 (x) phi2> over product pure
/// states: alternating ascent from random starts.
inline double best_product_overlap(const ComplexMatrix& m_big,
                                   const Dims& dims, CounterRng& rng,
                                   ComplexVector& phi1_out,
                                   ComplexVector& phi2_out, int inits = 3,
                                   int sweeps = 30) {
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < inits; ++t) {
    ComplexVector phi2 = sample_haar(dims.second, rng).vector();
    ComplexVector phi1;
    const double val = product_overlap_ascent(m_big, dims, phi1, phi2, sweeps);
    if (val > best) {
      best = val;
      phi1_out = phi1;
      phi2_out = phi2;
    }
  }
  return best;
}

}  // namespace detail

namespace detail {

/// Euclidean projection onto the probability simplex.
inline RealVector project_simplex(RealVector v) {
  const Index k = v.size();
  RealVector u = v;
  std::sort(u.data(), u.data() + k, std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  Index support = 0;
  for (Index j = 0; j < k; ++j) {
    cumsum += u(j);
    const double candidate = (cumsum - 1.0) / double(j + 1);
    if (u(j) - candidate > 0.0) {
      support = j + 1;
      tau = candidate;
    }
  }
  (void)support;
  return (v.array() - tau).max(0.0).matrix();
}

/// min_w || sigma - sum_k w_k T_k ||^2 over the simplex, by accelerated
/// projected gradient (FISTA) on the atom Gram matrix.
inline RealVector solve_simplex_weights(const RealMatrix& gram,
                                        const RealVector& overlaps,
                                        RealVector warm, int iterations) {
  const Index k = gram.rows();
  if (warm.size() != k) {
    warm = RealVector::Constant(k, 1.0 / double(k));
  }
  // power iteration for the largest Gram eigenvalue
  RealVector probe = RealVector::Constant(k, 1.0 / std::sqrt(double(k)));
  double lam = 1.0;
  for (int it = 0; it < 25; ++it) {
    probe = gram * probe;
    lam = probe.norm();
    if (lam < 1e-18) break;
    probe /= lam;
  }
  const double lipschitz = 2.0 * std::max(lam, 1e-12);
  RealVector w = project_simplex(warm);
  RealVector z = w;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const RealVector grad = 2.0 * (gram * z - overlaps);
    const RealVector w_next = project_simplex(z - grad / lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = w_next + ((t - 1.0) / t_next) * (w_next - w);
    w = w_next;
    t = t_next;
  }
  return w;
}

}  // namespace detail

namespace detail {

/// A mixture of product pure states with cached Gram and target-overlap data
/// for the weight subproblem.
struct ProductMixture {
  Dims dims;
  std::vector<ComplexVector> first, second;
  RealMatrix gram;
  RealVector overlaps;
  RealVector weights;

  explicit ProductMixture(const Dims& d)
      : dims(d), gram(0, 0), overlaps(0), weights(0) {}

  Index size() const { return static_cast<Index>(first.size()); }

  double atom_overlap(Index a, Index b) const {
    return std::norm(first[a].dot(first[b])) *
           std::norm(second[a].dot(second[b]));
  }

  void add(const ComplexMatrix& sigma, const ComplexVector& p1,
           const ComplexVector& p2) {
    const Index k = size();
    first.push_back(p1);
    second.push_back(p2);
    gram.conservativeResize(k + 1, k + 1);
    overlaps.conservativeResize(k + 1);
    weights.conservativeResize(k + 1);
    weights(k) = 0.0;
    for (Index j = 0; j <= k; ++j) {
      const double g = atom_overlap(k, j);
      gram(k, j) = g;
      gram(j, k) = g;
    }
    const ComplexVector prod = kron(p1, p2);
    overlaps(k) = prod.dot(sigma * prod).real();
  }

  void replace(const ComplexMatrix& sigma, Index k, const ComplexVector& p1,
               const ComplexVector& p2) {
    first[static_cast<std::size_t>(k)] = p1;
    second[static_cast<std::size_t>(k)] = p2;
    for (Index j = 0; j < size(); ++j) {
      const double g = atom_overlap(k, j);
      gram(k, j) = g;
      gram(j, k) = g;
    }
    const ComplexVector prod = kron(p1, p2);
    overlaps(k) = prod.dot(sigma * prod).real();
  }

  void solve_weights(int iterations) {
    weights = solve_simplex_weights(gram, overlaps, weights, iterations);
  }

  ComplexMatrix mixture() const {
    const Index d = dims.total();
    ComplexMatrix s = ComplexMatrix::Zero(d, d);
    for (Index a = 0; a < size(); ++a) {
      const ComplexVector prod = kron(first[a], second[a]);
      s += weights(a) * prod * prod.adjoint();
    }
    return s;
  }

  /// Drop negligible atoms; if still over the cap, keep the heaviest.
  void prune(const ComplexMatrix& sigma, Index max_atoms) {
    std::vector<Index> keep;
    for (Index a = 0; a < size(); ++a)
      if (weights(a) > 1e-12) keep.push_back(a);
    if (static_cast<Index>(keep.size()) > max_atoms) {
      std::sort(keep.begin(), keep.end(),
                [&](Index a, Index b) { return weights(a) > weights(b); });
      keep.resize(static_cast<std::size_t>(max_atoms));
    }
    if (static_cast<Index>(keep.size()) == size()) return;
    std::vector<ComplexVector> f, s2;
    std::vector<double> w;
    for (Index a : keep) {
      f.push_back(first[static_cast<std::size_t>(a)]);
      s2.push_back(second[static_cast<std::size_t>(a)]);
      w.push_back(weights(a));
    }
    first = std::move(f);
    second = std::move(s2);
    const Index k = size();
    gram.resize(k, k);
    overlaps.resize(k);
    weights.resize(k);
    double wsum = 0.0;
    for (double x : w) wsum += x;
    for (Index a = 0; a < k; ++a) {
      weights(a) = w[static_cast<std::size_t>(a)] / std::max(wsum, 1e-300);
      const ComplexVector prod = kron(first[a], second[a]);
      overlaps(a) = prod.dot(sigma * prod).real();
      for (Index b = 0; b <= a; ++b) {
        const double g = atom_overlap(a, b);
        gram(a, b) = g;
        gram(b, a) = g;
      }
    }
  }
};

}  // namespace detail

/// Upper bound on the Hilbert-Schmidt / L^2 distance from the separable set:
/// fully corrective conditional-gradient descent over mixtures of product
/// pure states, with random restarts. Each round adds the product state best
/// aligned with the residual, re-solves the mixture weights on the simplex,
/// and re-ascends every retained atom against its partial residual. The
/// measure D is the L^2 value, obtained from the operator distance through
/// d_L2 = d_HS / sqrt(nm + 1).
inline SeparableDistanceResult separable_distance_upper(
    const LiouvilleDensity& rho, const SeparableDistanceOptions& opts = {}) {
  const Dims& dims = detail::require_bipartite(rho, "separable_distance_upper");
  const ComplexMatrix& sigma = rho.state().matrix();
  const Index d = dims.total();
  const Index max_atoms = d * d;

  double best_dist = std::numeric_limits<double>::infinity();
  ComplexMatrix best_sep;
  for (int restart = 0; restart < opts.restarts; ++restart) {
    CounterRng rng(opts.seed, /*stream=*/1700 + restart, 0);
    detail::ProductMixture mix(dims);

    // seed with marginal eigenvector products; these alone realize product
    // and maximally mixed targets exactly
    {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> e1(
          partial_trace(sigma, dims, Factor::second));
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> e2(
          partial_trace(sigma, dims, Factor::first));
      for (Index i = 0; i < dims.first; ++i)
        for (Index j = 0; j < dims.second; ++j)
          mix.add(sigma, e1.eigenvectors().col(i), e2.eigenvectors().col(j));
      mix.solve_weights(300);
    }

    ComplexMatrix s = mix.mixture();
    double dist = hs_distance(sigma, s);
    int stalled = 0;
    for (int it = 0; it < opts.iterations; ++it) {
      const ComplexMatrix residual = sigma - s;
      ComplexVector phi1, phi2;
      const double gain =
          detail::best_product_overlap(residual, dims, rng, phi1, phi2);
      // drop near-duplicate atoms before extending the dictionary
      bool fresh = true;
      for (Index k = 0; k < mix.size() && fresh; ++k)
        if (std::norm(mix.first[static_cast<std::size_t>(k)].dot(phi1)) *
                std::norm(mix.second[static_cast<std::size_t>(k)].dot(phi2)) >
            1.0 - 1e-10)
          fresh = false;
      if (fresh && gain - hs_inner(residual, s).real() > 1e-15)
        mix.add(sigma, phi1, phi2);
      mix.solve_weights(150);
      s = mix.mixture();

      // coordinate re-ascent of each carried atom on its partial residual
      for (Index k = 0; k < mix.size(); ++k) {
        if (mix.weights(k) < 1e-10) continue;
        ComplexVector a1 = mix.first[static_cast<std::size_t>(k)];
        ComplexVector a2 = mix.second[static_cast<std::size_t>(k)];
        const ComplexVector old_prod = kron(a1, a2);
        const ComplexMatrix partial =
            sigma - s + mix.weights(k) * old_prod * old_prod.adjoint();
        detail::product_overlap_ascent(partial, dims, a1, a2, 20);
        mix.replace(sigma, k, a1, a2);
        const ComplexVector new_prod = kron(a1, a2);
        s += mix.weights(k) * (new_prod * new_prod.adjoint() -
                               old_prod * old_prod.adjoint());
      }
      mix.solve_weights(150);
      mix.prune(sigma, max_atoms);
      s = mix.mixture();

      const double new_dist = hs_distance(sigma, s);
      if (dist - new_dist < 1e-15) {
        if (++stalled >= 3) {
          dist = std::min(dist, new_dist);
          break;
        }
      } else {
        stalled = 0;
      }
      dist = std::min(dist, new_dist);
    }
    // final polish of the weights on the retained atoms
    if (mix.size() > 0) {
      mix.solve_weights(2000);
      s = mix.mixture();
      dist = std::min(dist, hs_distance(sigma, s));
    }
    if (dist < best_dist) {
      best_dist = dist;
      best_sep = s;
    }
  }

  SeparableDistanceResult out;
  out.hs_upper = best_dist;
  out.l2_upper = best_dist / std::sqrt(double(d + 1));
  out.nearest = std::move(best_sep);
  return out;
}

/// An entanglement witness built from the Schmidt decomposition of the
/// target pure state: A = lambda_1^2 I - |psi><psi| with lambda_1 the largest
/// Schmidt coefficient. Non-negative on every separable state, negative on
/// the target.
struct Witness {
  HermitianOperator observable;
  FrameFunction function;
  double largest_schmidt_sq = 0.0;
};

inline Witness schmidt_witness(const LiouvilleDensity& rho) {
  const Dims& dims = detail::require_bipartite(rho, "schmidt_witness");
  detail::require_pure(rho, "schmidt_witness");
  const EigenDecomposition eig = eigen_decomposition(rho.state().hermitian());
  const ComplexVector psi = eig.eigenvectors.col(0);
  const SchmidtDecomposition schmidt = schmidt_decomposition(psi, dims);
  if (schmidt_rank(schmidt, 1e-8) < 2)
    throw std::invalid_argument(
        "schmidt_witness: target is a separable pure state; no witness "
        "targets it");
  const double lam1_sq =
      schmidt.coefficients(0) * schmidt.coefficients(0);
  const Index d = dims.total();
  HermitianOperator a(lam1_sq * ComplexMatrix::Identity(d, d) -
                      psi * psi.adjoint());
  FrameFunction f = observable_to_function(a, double(d + 1), dims);
  return Witness{std::move(a), std::move(f), lam1_sq};
}

struct WitnessEvaluation {
  double exact = 0.0;  // tr(A sigma) = int f rho dnu
  MCEstimate mc;
  bool violated = false;
};

/// Evaluates the witness inequality int f rho dnu >= 0 exactly and by
/// Monte-Carlo; `violated` reports entanglement detection (exact value < 0).
inline WitnessEvaluation witness_evaluate(const Witness& w,
                                          const LiouvilleDensity& rho,
                                          std::uint64_t n_samples,
                                          std::uint64_t seed) {
  if (w.observable.dim() != rho.dim())
    throw std::invalid_argument("witness_evaluate: dimension mismatch");
  WitnessEvaluation out;
  out.exact = (w.observable.matrix() * rho.state().matrix()).trace().real();
  out.mc = mc_integrate(
      [&](const ProjectivePoint& p) {
        return w.function.real_at(p) * rho(p);
      },
      rho.dim(), MeasureConvention{Measure::liouville}, n_samples, seed);
  out.violated = out.exact < 0.0;
  return out;
}

struct ProjectorConditionResult {
  bool holds = false;
  double backing_deviation = 0.0;    // || tau^2 - tau ||_HS
  double max_probe_deviation = 0.0;  // worst |G(d eta, d eta) - 2(eta - eta^2)|
};

/// Checks the projector condition G(d eta, d eta) = 2 (eta - eta^2): exactly
/// through idempotence of the backing operator, and pointwise at Haar probes
/// through the metric pairing. `side` records which factor's metric the
/// condition refers to; the computation is identical on both.
inline ProjectorConditionResult projector_condition_check(
    const FrameFunction& eta, Factor /*side*/, int n_probes = 50,
    std::uint64_t seed = 0, double exact_tol = 1e-10,
    double probe_tol = 1e-8) {
  if (!eta.is_real_valued(1e-10))
    throw std::invalid_argument("projector_condition_check: eta must be real");
  const ComplexMatrix& tau = eta.backing();
  ProjectorConditionResult out;
  out.backing_deviation = hs_distance(tau * tau, tau);
  const MetricPairing pairing = metric_pairing(eta, eta);
  for (int i = 0; i < n_probes; ++i) {
    const ProjectivePoint p =
        sample_haar(eta.dim(), seed, static_cast<std::uint64_t>(i));
    const double lhs = pairing(p);
    const double e = eta.real_at(p);
    out.max_probe_deviation =
        std::max(out.max_probe_deviation, std::abs(lhs - 2.0 * (e - e * e)));
  }
  out.holds = out.backing_deviation <= exact_tol &&
              out.max_probe_deviation <= probe_tol;
  return out;
}

enum class SeparabilityVerdict { consistent_with_separable, entangled_certified };

struct SeparabilityReport {
  SeparabilityVerdict verdict =
      SeparabilityVerdict::consistent_with_separable;
  double most_negative = 0.0;  // most negative certified witness integral
  int certifying_probe = -1;
};

enum class PptVerdict { ppt, npt };

struct PptResult {
  PptVerdict verdict = PptVerdict::ppt;
  double min_eigenvalue = 0.0;
};

/// Positive-partial-transpose check (test fixture): transpose the second
/// factor and look for a negative eigenvalue.
inline PptResult ppt_check(const DensityMatrix& sigma, const Dims& dims) {
  if (sigma.dim() != dims.total())
    throw std::invalid_argument("ppt_check: state/dims mismatch");
  const ComplexMatrix pt =
      partial_transpose(sigma.matrix(), dims, Factor::second);
  const RealVector evals = detail::hermitian_eigenvalues(pt);
  PptResult out;
  out.min_eigenvalue = evals.minCoeff();
  out.verdict =
      out.min_eigenvalue < -1e-10 ? PptVerdict::npt : PptVerdict::ppt;
  return out;
}

/// Sampled necessary-condition battery for separability.
///
/// Probe observables are block-positive by construction or screened against
/// the product-projector condition on sampled pairs; the state is certified
/// entangled only when a screened probe has a strictly negative exact
/// integral. A non-certification is always reported as consistent, never as
/// separable-certified.
inline SeparabilityReport sep_necessary_test(const LiouvilleDensity& rho,
                                             int n_witness_probes,
                                             std::uint64_t seed) {
  const Dims& dims = detail::require_bipartite(rho, "sep_necessary_test");
  const ComplexMatrix& sigma = rho.state().matrix();
  const Index n = dims.first, m = dims.second;

  std::vector<ComplexMatrix> probes;

  // block-positive combinations sum_i c_i P_i (x) Q_i, c_i >= 0
  {
    CounterRng rng(seed, /*stream=*/40, 0);
    for (int t = 0; t < 4; ++t) {
      ComplexMatrix a = ComplexMatrix::Zero(dims.total(), dims.total());
      for (int k = 0; k < 3; ++k) {
        const ComplexMatrix p1 = sample_haar(n, rng).projector();
        const ComplexMatrix p2 = sample_haar(m, rng).projector();
        a += rng.next_double() * kron(p1, p2);
      }
      probes.push_back(std::move(a));
    }
  }

  // the target's own Schmidt witness, when it is pure and entangled
  if (purity_check(rho, 1e-8).pure) {
    const EigenDecomposition eig =
        eigen_decomposition(rho.state().hermitian());
    const SchmidtDecomposition schmidt =
        schmidt_decomposition(eig.eigenvectors.col(0), dims);
    if (schmidt_rank(schmidt, 1e-8) >= 2)
      probes.push_back(schmidt_witness(rho).observable.matrix());
  }

  // decomposable witnesses from negative eigenvectors of the partial
  // transpose: (|chi><chi|)^{T_2} is block-positive by construction
  {
    const ComplexMatrix pt = partial_transpose(sigma, dims, Factor::second);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(pt);
    for (Index k = 0; k < solver.eigenvalues().size(); ++k)
      if (solver.eigenvalues()(k) < -1e-10) {
        const ComplexVector chi = solver.eigenvectors().col(k);
        probes.push_back(
            partial_transpose(chi * chi.adjoint(), dims, Factor::second));
      }
  }

  // random Schmidt witnesses
  for (int t = 0; t < n_witness_probes; ++t) {
    CounterRng rng(seed, /*stream=*/41, static_cast<std::uint64_t>(t));
    const ProjectivePoint phi = sample_haar(dims.total(), rng);
    const SchmidtDecomposition schmidt =
        schmidt_decomposition(phi.vector(), dims);
    if (schmidt_rank(schmidt, 1e-8) < 2) continue;
    const double lam1_sq = schmidt.coefficients(0) * schmidt.coefficients(0);
    probes.push_back(lam1_sq * ComplexMatrix::Identity(dims.total(), dims.total()) -
                     phi.projector());
  }

  SeparabilityReport report;
  constexpr int kScreenPairs = 1000;
  for (std::size_t idx = 0; idx < probes.size(); ++idx) {
    const ComplexMatrix& a = probes[idx];
    const double value = (a * sigma).trace().real();
    if (value >= -1e-10) continue;
    // screen the candidate on sampled product projector pairs
    bool screened_ok = true;
    for (int t = 0; t < kScreenPairs; ++t) {
      const ProjectivePoint q1 =
          sample_haar(n, seed, static_cast<std::uint64_t>(t), /*stream=*/42);
      const ProjectivePoint q2 =
          sample_haar(m, seed, static_cast<std::uint64_t>(t), /*stream=*/43);
      const ComplexVector prod = kron(q1.vector(), q2.vector());
      if (prod.dot(a * prod).real() < -1e-10) {
        screened_ok = false;
        break;
      }
    }
    if (screened_ok) {
      report.verdict = SeparabilityVerdict::entangled_certified;
      if (value < report.most_negative) {
        report.most_negative = value;
        report.certifying_probe = static_cast<int>(idx);
      }
    }
  }
  return report;
}

}  // namespace projqm
