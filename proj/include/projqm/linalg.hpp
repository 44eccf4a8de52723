#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace projqm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kDensityEigenvalueTol = 1e-10;
inline constexpr double kDensityTraceTol = 1e-10;

/// Which factor of a bipartite split an operation refers to.
enum class Factor { first, second };

/// Dimensions (n, m) of a bipartite factorization H (x) K. Both factors must
/// have dimension > 2 so that frame functions remain in bijection with
/// operators on each factor.
struct Dims {
  Index first = 0;
  Index second = 0;

  Dims(Index n, Index m) : first(n), second(m) {
    if (n < 3 || m < 3)
      throw std::invalid_argument(
          "bipartite factor dimensions must both be > 2, got (" +
          std::to_string(n) + ", " + std::to_string(m) + ")");
  }

  Index total() const { return first * second; }
  bool operator==(const Dims& other) const = default;
};

inline bool is_square(const ComplexMatrix& m) { return m.rows() == m.cols(); }

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
  if (!is_square(m)) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// A validated self-adjoint operator.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m, double tol = kHermitianTol)
      : mat_(std::move(m)) {
    if (!is_square(mat_))
      throw std::invalid_argument("Hermitian operator must be square");
    if (!is_hermitian(mat_, tol))
      throw std::invalid_argument(
          "matrix is not Hermitian within tolerance " + std::to_string(tol));
  }

  Index dim() const { return mat_.rows(); }
  const ComplexMatrix& matrix() const { return mat_; }

 private:
  ComplexMatrix mat_;
};

namespace detail {
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m,
                                                      Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}
}  // namespace detail

/// A positive unit-trace Hermitian operator (a quantum state).
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianOperator op,
                         double eig_tol = kDensityEigenvalueTol,
                         double trace_tol = kDensityTraceTol)
      : op_(std::move(op)) {
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > trace_tol)
      throw std::invalid_argument("density matrix trace " + std::to_string(tr) +
                                  " deviates from 1 beyond tolerance");
    const RealVector evals = detail::hermitian_eigenvalues(op_.matrix());
    if (evals.minCoeff() < -eig_tol)
      throw std::invalid_argument(
          "density matrix has eigenvalue " + std::to_string(evals.minCoeff()) +
          " below positivity tolerance");
  }

  explicit DensityMatrix(const ComplexMatrix& m)
      : DensityMatrix(HermitianOperator(m)) {}

  DensityMatrix(const ComplexMatrix& m, double herm_tol, double eig_tol,
                double trace_tol)
      : DensityMatrix(HermitianOperator(m, herm_tol), eig_tol, trace_tol) {}

  Index dim() const { return op_.dim(); }
  const ComplexMatrix& matrix() const { return op_.matrix(); }
  const HermitianOperator& hermitian() const { return op_; }

 private:
  HermitianOperator op_;
};

/// An operator on a tensor-product space together with its (n, m) split.
class BipartiteOperator {
 public:
  BipartiteOperator(ComplexMatrix m, Dims dims)
      : mat_(std::move(m)), dims_(dims) {
    if (!is_square(mat_))
      throw std::invalid_argument("bipartite operator must be square");
    if (mat_.rows() != dims_.total())
      throw std::invalid_argument(
          "operator dimension " + std::to_string(mat_.rows()) +
          " does not equal product of factor dimensions " +
          std::to_string(dims_.total()));
  }

  const Dims& dims() const { return dims_; }
  Index dim() const { return mat_.rows(); }
  const ComplexMatrix& matrix() const { return mat_; }

 private:
  ComplexMatrix mat_;
  Dims dims_;
};

/// Kronecker product, row-major block convention: (i*m+k, j*m+l).
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline BipartiteOperator tensor_product(const ComplexMatrix& a,
                                        const ComplexMatrix& b) {
  if (!is_square(a) || !is_square(b))
    throw std::invalid_argument("tensor_product requires square factors");
  return BipartiteOperator(kron(a, b), Dims(a.rows(), b.rows()));
}

/// Partial trace over the chosen factor: the unique Y with
/// tr(Y B) = tr(X (B (x) I)) for all B on the remaining factor.
inline ComplexMatrix partial_trace(const ComplexMatrix& x, const Dims& dims,
                                   Factor traced) {
  if (x.rows() != dims.total() || x.cols() != dims.total())
    throw std::invalid_argument("partial_trace: operator/dims mismatch");
  const Index n = dims.first, m = dims.second;
  if (traced == Factor::second) {
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < m; ++k) out(i, j) += x(i * m + k, j * m + k);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(m, m);
  for (Index k = 0; k < m; ++k)
    for (Index l = 0; l < m; ++l)
      for (Index i = 0; i < n; ++i) out(k, l) += x(i * m + k, i * m + l);
  return out;
}

inline ComplexMatrix partial_trace(const BipartiteOperator& x, Factor traced) {
  return partial_trace(x.matrix(), x.dims(), traced);
}

/// Partial transpose on the chosen factor (used by the PPT fixture).
inline ComplexMatrix partial_transpose(const ComplexMatrix& x,
                                       const Dims& dims, Factor transposed) {
  if (x.rows() != dims.total() || x.cols() != dims.total())
    throw std::invalid_argument("partial_transpose: operator/dims mismatch");
  const Index n = dims.first, m = dims.second;
  ComplexMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < m; ++k)
        for (Index l = 0; l < m; ++l) {
          if (transposed == Factor::second)
            out(i * m + l, j * m + k) = x(i * m + k, j * m + l);
          else
            out(j * m + k, i * m + l) = x(i * m + k, j * m + l);
        }
  return out;
}

/// Hilbert-Schmidt inner product tr(a^dagger b).
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: shape mismatch");
  return (a.adjoint() * b).trace();
}

inline double hs_norm(const ComplexMatrix& a) {
  return std::sqrt(std::abs(hs_inner(a, a).real()));
}

inline double hs_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return hs_norm(a - b);
}

struct EigenDecomposition {
  RealVector eigenvalues;     // descending
  ComplexMatrix eigenvectors;  // orthonormal columns, matching order
};

inline EigenDecomposition eigen_decomposition(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");
  const Index n = a.dim();
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = ComplexMatrix(n, n);
  for (Index i = 0; i < n; ++i)
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  return out;
}

struct SchmidtDecomposition {
  RealVector coefficients;  // lambda_i >= 0, descending, sum of squares 1
  ComplexMatrix left;       // orthonormal columns in H
  ComplexMatrix right;      // orthonormal columns in K
};

/// Schmidt decomposition of a unit vector psi in H (x) K:
/// psi = sum_i lambda_i u_i (x) v_i.
inline SchmidtDecomposition schmidt_decomposition(const ComplexVector& psi,
                                                  const Dims& dims) {
  if (psi.size() != dims.total())
    throw std::invalid_argument("schmidt_decomposition: vector/dims mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("schmidt_decomposition requires a unit vector");
  const Index n = dims.first, m = dims.second;
  ComplexMatrix coeff(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < m; ++k) coeff(i, k) = psi(i * m + k);
  Eigen::JacobiSVD<ComplexMatrix> svd(
      coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition out;
  out.coefficients = svd.singularValues();
  out.left = svd.matrixU();
  out.right = svd.matrixV().conjugate();
  return out;
}

inline Index schmidt_rank(const SchmidtDecomposition& s, double tol = 1e-10) {
  Index r = 0;
  for (Index i = 0; i < s.coefficients.size(); ++i)
    if (s.coefficients(i) > tol) ++r;
  return r;
}

/// Orthonormal Hermitian basis of the n x n operators under hs_inner.
/// First element is I/sqrt(n); the rest are traceless.
inline std::vector<ComplexMatrix> hermitian_basis(Index n) {
  if (n < 1) throw std::invalid_argument("hermitian_basis: n must be >= 1");
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(n * n));
  basis.push_back(ComplexMatrix::Identity(n, n) / std::sqrt(double(n)));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      ComplexMatrix sym = ComplexMatrix::Zero(n, n);
      sym(i, j) = inv_sqrt2;
      sym(j, i) = inv_sqrt2;
      basis.push_back(sym);
      ComplexMatrix asym = ComplexMatrix::Zero(n, n);
      asym(i, j) = Complex(0, -inv_sqrt2);
      asym(j, i) = Complex(0, inv_sqrt2);
      basis.push_back(asym);
    }
  for (Index k = 1; k < n; ++k) {
    ComplexMatrix diag = ComplexMatrix::Zero(n, n);
    const double norm = 1.0 / std::sqrt(double(k) * double(k + 1));
    for (Index i = 0; i < k; ++i) diag(i, i) = norm;
    diag(k, k) = -double(k) * norm;
    basis.push_back(diag);
  }
  return basis;
}

}  // namespace projqm
