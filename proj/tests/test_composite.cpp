#include <catch2/catch_amalgamated.hpp>

#include "projqm/composite.hpp"
#include "projqm/random.hpp"

using namespace projqm;

namespace {
ComplexVector basis_vector(Index n, Index k) {
  ComplexVector e = ComplexVector::Zero(n);
  e(k) = 1;
  return e;
}
}  // namespace

TEST_CASE("segre embedding maps basis pairs to product basis points") {
  const ProjectivePoint p1(basis_vector(3, 1));
  const ProjectivePoint p2(basis_vector(4, 2));
  const ProjectivePoint joint = segre(p1, p2);
  REQUIRE((joint.vector() - kron(p1.vector(), p2.vector())).norm() < 1e-15);
  REQUIRE(hs_distance(joint.projector(),
                      kron(p1.projector(), p2.projector())) < 1e-15);
}

TEST_CASE("segre embedding factorizes product observables") {
  CounterRng rng(1);
  for (int t = 0; t < 10; ++t) {
    const ProjectivePoint p1 = sample_haar(3, rng);
    const ProjectivePoint p2 = sample_haar(3, rng);
    const ComplexMatrix a = random_complex_matrix(3, 3, rng);
    const ComplexMatrix b = random_complex_matrix(3, 3, rng);
    const Complex lhs = (segre(p1, p2).projector() * kron(a, b)).trace();
    const Complex rhs = (p1.projector() * a).trace() *
                        (p2.projector() * b).trace();
    REQUIRE(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("segre embedding separates distinct pairs") {
  CounterRng rng(2);
  for (int t = 0; t < 10; ++t) {
    const ProjectivePoint p1 = sample_haar(3, rng);
    const ProjectivePoint p2 = sample_haar(3, rng);
    const ProjectivePoint q1 = sample_haar(3, rng);
    const ProjectivePoint q2 = sample_haar(3, rng);
    if (d2_distance(p1, q1) > 1e-6 || d2_distance(p2, q2) > 1e-6)
      REQUIRE(d2_distance(segre(p1, p2), segre(q1, q2)) > 1e-8);
  }
}

TEST_CASE("pullback of product-state densities factorizes") {
  CounterRng rng(3);
  const DensityMatrix s1 = random_density(3, 2, rng);
  const DensityMatrix s2 = random_density(3, 3, rng);
  const FrameFunction rho =
      s_map(kron(s1.matrix(), s2.matrix()), Dims(3, 3));
  for (int t = 0; t < 10; ++t) {
    const ProductPoint pp{sample_haar(3, rng), sample_haar(3, rng)};
    const Complex lhs = pullback(rho, pp);
    const double rhs =
        pp.first.vector().dot(s1.matrix() * pp.first.vector()).real() *
        pp.second.vector().dot(s2.matrix() * pp.second.vector()).real();
    REQUIRE(std::abs(lhs - rhs) < 1e-12);
  }

  const FrameFunction uniform =
      s_map(ComplexMatrix::Identity(9, 9) / 9.0, Dims(3, 3));
  const ProductPoint pp{sample_haar(3, rng), sample_haar(3, rng)};
  REQUIRE(pullback(uniform, pp).real() == Catch::Approx(1.0 / 9.0).margin(1e-12));
}

TEST_CASE("pullback requires factorization dims") {
  const FrameFunction no_dims = s_map(ComplexMatrix::Identity(9, 9));
  const ProductPoint pp{sample_haar(3, 0, 0), sample_haar(3, 0, 1)};
  REQUIRE_THROWS_AS(pullback(no_dims, pp), std::invalid_argument);
}

TEST_CASE("product expansion reconstructs a bipartite function") {
  const Dims dims(3, 3);
  CounterRng rng(4);
  const ComplexMatrix target = random_complex_matrix(9, 9, rng);
  const auto gs = hermitian_basis(3);
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> terms;
  for (const auto& g : gs)
    for (const auto& h : gs) {
      const Complex c = hs_inner(kron(g, h), target);
      terms.emplace_back(c * g, h);
    }
  const FrameFunction rebuilt =
      from_product_expansion(dims, terms, double(dims.total() + 1));
  REQUIRE(hs_distance(rebuilt.backing(), target) < 1e-10);
}

TEST_CASE("diamond product intertwines the tensor product") {
  CounterRng rng(5);
  const DensityMatrix s1 = random_density(3, 2, rng);
  const DensityMatrix s2 = random_density(3, 1, rng);
  const FrameFunction lhs = diamond_product(s_map(s1.matrix()),
                                            s_map(s2.matrix()));
  REQUIRE(hs_distance(lhs.backing(), kron(s1.matrix(), s2.matrix())) == 0.0);
  REQUIRE(lhs.dims() == Dims(3, 3));

  // constants multiply
  const FrameFunction c1 = s_map(0.5 * ComplexMatrix::Identity(3, 3));
  const FrameFunction c2 = s_map(0.2 * ComplexMatrix::Identity(3, 3));
  const FrameFunction prod = diamond_product(c1, c2);
  const ProductPoint pp{sample_haar(3, rng), sample_haar(3, rng)};
  REQUIRE(pullback(prod, pp).real() == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("diamond product is bilinear") {
  CounterRng rng(6);
  const FrameFunction f1 = s_map(random_complex_matrix(3, 3, rng));
  const FrameFunction f2 = s_map(random_complex_matrix(3, 3, rng));
  const FrameFunction g = s_map(random_complex_matrix(3, 3, rng));
  const Complex alpha(1.3, -0.4);
  const ComplexMatrix lhs =
      diamond_product(FrameFunction(alpha * f1.backing() + f2.backing(), 4.0),
                      g)
          .backing();
  const ComplexMatrix rhs = alpha * diamond_product(f1, g).backing() +
                            diamond_product(f2, g).backing();
  REQUIRE(hs_distance(lhs, rhs) < 1e-12);
}

TEST_CASE("diamond kernel Monte-Carlo path agrees with the exact product") {
  CounterRng rng(7);
  const DensityMatrix s1 = random_density(3, 2, rng);
  const DensityMatrix s2 = random_density(3, 2, rng);
  const FrameFunction rho1 = s_map(s1.matrix());
  const FrameFunction rho2 = s_map(s2.matrix());
  const FrameFunction exact = diamond_product(rho1, rho2);
  int agreements = 0;
  const int probes = 20;
  for (int t = 0; t < probes; ++t) {
    const ProjectivePoint p = sample_haar(9, 50, static_cast<std::uint64_t>(t));
    const MCEstimate est = diamond_kernel_mc(rho1, rho2, p, 100000,
                                             60 + static_cast<std::uint64_t>(t));
    const double target = p.vector().dot(exact.backing() * p.vector()).real();
    if (std::abs(est.real() - target) <= 3.0 * est.std_error) ++agreements;
  }
  REQUIRE(agreements >= 19);
}

TEST_CASE("partial integral of product functions factorizes") {
  CounterRng rng(8);
  const DensityMatrix s1 = random_density(3, 2, rng);
  const DensityMatrix s2 = random_density(4, 3, rng);
  const FrameFunction rho = s_map(kron(s1.matrix(), s2.matrix()), Dims(3, 4));
  const FrameFunction reduced = partial_integral(rho, Factor::second);
  REQUIRE(hs_distance(reduced.backing(), s1.matrix()) < 1e-12);
  const FrameFunction reduced_h = partial_integral(rho, Factor::first);
  REQUIRE(hs_distance(reduced_h.backing(), s2.matrix()) < 1e-12);
}

TEST_CASE("partial integral of the uniform and maximally entangled densities") {
  const FrameFunction uniform =
      s_map(ComplexMatrix::Identity(9, 9) / 9.0, Dims(3, 3));
  const FrameFunction reduced = partial_integral(uniform, Factor::second);
  CounterRng rng(9);
  for (int t = 0; t < 5; ++t)
    REQUIRE(reduced.real_at(sample_haar(3, rng)) ==
            Catch::Approx(1.0 / 3.0).margin(1e-12));

  ComplexVector phi = ComplexVector::Zero(9);
  for (Index i = 0; i < 3; ++i) phi(i * 3 + i) = 1.0 / std::sqrt(3.0);
  const FrameFunction ent = s_map(phi * phi.adjoint(), Dims(3, 3));
  REQUIRE(hs_distance(partial_integral(ent, Factor::second).backing(),
                      ComplexMatrix::Identity(3, 3) / 3.0) < 1e-12);
}

TEST_CASE("partial integral is trace compatible") {
  CounterRng rng(10);
  for (int t = 0; t < 10; ++t) {
    const FrameFunction rho =
        s_map(random_complex_matrix(12, 12, rng), Dims(3, 4));
    for (Factor side : {Factor::second, Factor::first}) {
      const FrameFunction reduced = partial_integral(rho, side);
      REQUIRE(std::abs(exact_integral(reduced) - exact_integral(rho)) < 1e-12);
    }
  }
}

TEST_CASE("partial integral Monte-Carlo path agrees with the exact route") {
  CounterRng rng(11);
  const DensityMatrix sigma = random_density(9, 4, rng);
  const FrameFunction rho = s_map(sigma.matrix(), Dims(3, 3));
  const FrameFunction reduced = partial_integral(rho, Factor::second);
  int agreements = 0;
  for (int t = 0; t < 10; ++t) {
    const ProjectivePoint at = sample_haar(3, 70, static_cast<std::uint64_t>(t));
    const MCEstimate est = partial_integral_mc(
        rho, Factor::second, at, 100000, 80 + static_cast<std::uint64_t>(t));
    if (std::abs(est.real() - reduced.real_at(at)) <= 3.0 * est.std_error)
      ++agreements;
  }
  REQUIRE(agreements >= 9);
}

TEST_CASE("partial integral requires dims metadata") {
  const FrameFunction no_dims = s_map(ComplexMatrix::Identity(9, 9));
  REQUIRE_THROWS_AS(partial_integral(no_dims, Factor::second),
                    std::invalid_argument);
}

TEST_CASE("product-space integration matches the big-space integral") {
  CounterRng rng(12);

  // a density integrates to one on both routes
  const DensityMatrix sigma = random_density(9, 3, rng);
  const FrameFunction rho = s_map(sigma.matrix(), Dims(3, 3));
  const MCEstimate density_est = product_space_integral(rho, 100000, 90);
  REQUIRE(std::abs(exact_integral(rho).real() - 1.0) < 1e-12);
  REQUIRE(std::abs(density_est.real() - 1.0) <= 3.0 * density_est.std_error);

  // the constant function reproduces the total mass n*m exactly
  const FrameFunction one = s_map(ComplexMatrix::Identity(9, 9), Dims(3, 3));
  const MCEstimate mass = product_space_integral(one, 1000, 91);
  REQUIRE(mass.real() == Catch::Approx(9.0).margin(1e-12));
  REQUIRE(mass.std_error == Catch::Approx(0.0).margin(1e-12));

  // random bipartite operators agree within Monte-Carlo error
  int agreements = 0;
  for (int t = 0; t < 10; ++t) {
    const FrameFunction f =
        s_map(random_hermitian(9, rng).matrix(), Dims(3, 3));
    const MCEstimate est =
        product_space_integral(f, 100000, 92 + static_cast<std::uint64_t>(t));
    if (std::abs(est.real() - exact_integral(f).real()) <=
        3.0 * est.std_error)
      ++agreements;
  }
  REQUIRE(agreements >= 9);
}
