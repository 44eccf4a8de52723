#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "projqm/composite.hpp"
#include "projqm/entanglement.hpp"
#include "projqm/frame_function.hpp"
#include "projqm/linalg.hpp"
#include "projqm/projective.hpp"
#include "projqm/random.hpp"
#include "projqm/requantize.hpp"

namespace projqm {

struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckConfig {
  Dims dims{3, 3};
  std::uint64_t seed = 0;
  std::uint64_t mc_samples = 100000;  // statistical probes
  std::uint64_t mc_small = 20000;     // per-run budget in repeated loops
};

namespace detail {

inline std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline CheckResult bound_check(std::string module, std::string name,
                               double value, double bound) {
  CheckResult r{std::move(module), std::move(name), value <= bound,
                "max deviation " + fmt_value(value) + " (bound " +
                    fmt_value(bound) + ")"};
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_linear_core_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const Index n = cfg.dims.first, m = cfg.dims.second;
  CounterRng rng(cfg.seed, 100, 0);

  double dev_duality = 0.0;
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix x = random_complex_matrix(n * m, n * m, rng);
    const ComplexMatrix b = random_hermitian(n, rng).matrix();
    const Complex lhs = (partial_trace(x, cfg.dims, Factor::second) * b).trace();
    const Complex rhs = (x * kron(b, ComplexMatrix::Identity(m, m))).trace();
    dev_duality = std::max(dev_duality, std::abs(lhs - rhs));
  }
  out.push_back(detail::bound_check("linear-core", "partial-trace duality",
                                    dev_duality, 1e-9));

  double dev_compose = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix s1 = random_complex_matrix(n, n, rng);
    const ComplexMatrix s2 = random_complex_matrix(m, m, rng);
    dev_compose = std::max(
        dev_compose,
        hs_distance(partial_trace(tensor_product(s1, s2), Factor::second),
                    s1 * s2.trace()));
  }
  out.push_back(detail::bound_check(
      "linear-core", "tensor/partial-trace composition", dev_compose, 1e-12));

  double dev_schmidt = 0.0;
  for (int t = 0; t < 10; ++t) {
    const ComplexVector psi = sample_haar(n * m, rng).vector();
    const ComplexMatrix u = random_unitary(n, rng);
    const ComplexMatrix v = random_unitary(m, rng);
    const RealVector c1 = schmidt_decomposition(psi, cfg.dims).coefficients;
    const RealVector c2 =
        schmidt_decomposition(kron(u, v) * psi, cfg.dims).coefficients;
    dev_schmidt = std::max(dev_schmidt, (c1 - c2).cwiseAbs().maxCoeff());
  }
  out.push_back(detail::bound_check(
      "linear-core", "schmidt local-unitary invariance", dev_schmidt, 1e-9));
  return out;
}

inline std::vector<CheckResult> run_projective_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const Index n = cfg.dims.first;
  CounterRng rng(cfg.seed, 200, 0);

  // sampler unitary invariance, 4 combined standard errors
  {
    const ComplexMatrix u = random_unitary(n, rng);
    bool pass = true;
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const ComplexMatrix a = random_hermitian(n, rng).matrix();
      const MCEstimate direct = mc_integrate(
          [&](const ProjectivePoint& p) {
            return p.vector().dot(a * p.vector()).real();
          },
          n, MeasureConvention{Measure::probability}, cfg.mc_samples,
          cfg.seed + 11 + t);
      const MCEstimate rotated = mc_integrate(
          [&](const ProjectivePoint& p) {
            const ComplexVector v = u * p.vector();
            return v.dot(a * v).real();
          },
          n, MeasureConvention{Measure::probability}, cfg.mc_samples,
          cfg.seed + 37 + t);
      const double sigma_c = std::hypot(direct.std_error, rotated.std_error);
      const double z = std::abs(direct.real() - rotated.real()) /
                       std::max(sigma_c, 1e-300);
      worst = std::max(worst, z);
      if (z > 4.0) pass = false;
    }
    out.push_back({"projective-space", "sampler unitary invariance", pass,
                   "worst z-score " + detail::fmt_value(worst) +
                       " (bound 4)"});
  }

  {
    const MCEstimate mass = mc_integrate(
        [](const ProjectivePoint&) { return 1.0; }, n,
        MeasureConvention{Measure::liouville}, 1000, cfg.seed);
    const bool pass = mass.real() == double(n) && mass.std_error == 0.0;
    out.push_back({"projective-space", "measure mass", pass,
                   "mass " + detail::fmt_value(mass.real()) +
                       ", std error " + detail::fmt_value(mass.std_error)});
  }

  {
    double dev = 0.0;
    for (int t = 0; t < 100; ++t) {
      const ProjectivePoint p = sample_haar(n, rng);
      const TangentVector u_t(p, random_hermitian(n, rng).matrix());
      const TangentVector v_t(p, random_hermitian(n, rng).matrix());
      const double kappa = 0.5 + 4.0 * rng.next_double();
      dev = std::max(dev, std::abs(symplectic_form(u_t, v_t, kappa) +
                                   symplectic_form(v_t, u_t, kappa)));
      dev = std::max(dev, std::abs(fubini_study_metric(u_t, v_t, kappa) -
                                   fubini_study_metric(v_t, u_t, kappa)));
      const TangentVector jv = complex_structure(v_t);
      dev = std::max(dev, hs_distance(complex_structure(jv).realized(),
                                      -v_t.realized()));
      dev = std::max(dev, std::abs(symplectic_form(u_t, v_t, kappa) -
                                   fubini_study_metric(u_t, jv, kappa)));
    }
    out.push_back(detail::bound_check("projective-space",
                                      "kaehler triple relations", dev, 1e-10));
  }
  return out;
}

inline std::vector<CheckResult> run_frame_function_checks(
    const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const Index n = cfg.dims.first;
  CounterRng rng(cfg.seed, 300, 0);

  {
    double dev = 0.0;
    const ComplexMatrix backing = random_complex_matrix(n, n, rng);
    const FrameFunction f(backing, double(n + 1));
    for (int t = 0; t < 20; ++t) {
      const ComplexMatrix u = random_unitary(n, rng);
      Complex sum(0, 0);
      for (Index k = 0; k < n; ++k)
        sum += f(ProjectivePoint(ComplexVector(u.col(k))));
      dev = std::max(dev, std::abs(sum - backing.trace()));
    }
    out.push_back(detail::bound_check("frame-functions",
                                      "frame-weight constancy", dev, 1e-10));
  }

  {
    const HermitianOperator a = random_hermitian(n, rng);
    const HermitianOperator b = random_hermitian(n, rng);
    const double kappa = double(n + 1);
    const ComplexMatrix lin =
        observable_to_function(
            HermitianOperator(0.3 * a.matrix() - 1.1 * b.matrix()), kappa)
            .backing() -
        (0.3 * observable_to_function(a, kappa).backing() -
         1.1 * observable_to_function(b, kappa).backing());
    const DensityMatrix s1 = random_density(n, n, rng);
    const DensityMatrix s2 = random_density(n, 1, rng);
    const ComplexMatrix convex =
        state_to_density(DensityMatrix(0.4 * s1.matrix() + 0.6 * s2.matrix()))
            .function()
            .backing() -
        (0.4 * state_to_density(s1).function().backing() +
         0.6 * state_to_density(s2).function().backing());
    out.push_back(detail::bound_check("frame-functions", "map linearity",
                                      std::max(hs_norm(lin), hs_norm(convex)),
                                      1e-12));
  }

  {
    // star-product expansion: the self-consistent grouping must match the
    // operator path; the printed grouping is reported if it deviates
    const FrameFunction f =
        observable_to_function(random_hermitian(n, rng), double(n + 1));
    const FrameFunction g =
        observable_to_function(random_hermitian(n, rng), double(n + 1));
    const FrameFunction fg = star_product(f, g);
    const FrameFunction pb = poisson_bracket(f, g);
    const MetricPairing pairing = metric_pairing(f, g);
    const double int_f = exact_integral(f).real();
    const double int_g = exact_integral(g).real();
    const double int_fg = exact_l2_inner(f, g).real();
    double dev_consistent = 0.0, dev_printed = 0.0;
    for (int t = 0; t < 50; ++t) {
      const ProjectivePoint p = sample_haar(n, rng);
      const double fv = f.real_at(p), gv = g.real_at(p);
      const Complex consistent =
          (Complex(0, 0.5) * pb(p) + 0.5 * pairing(p) + fv * gv + fv * int_g +
           gv * int_f - int_fg) /
          double(n + 1);
      const Complex printed =
          Complex(0, 0.5) * pb(p) + 0.5 * pairing(p) +
          double(n) / double(n + 1) *
              (fv * gv / double(n) - int_fg - fv * int_g - gv * int_f);
      dev_consistent = std::max(dev_consistent, std::abs(fg(p) - consistent));
      dev_printed = std::max(dev_printed, std::abs(fg(p) - printed));
    }
    CheckResult r = detail::bound_check(
        "frame-functions", "star-product expansion", dev_consistent, 1e-8);
    if (dev_printed > 1e-8)
      r.detail += "; printed constant-term grouping deviates by " +
                  detail::fmt_value(dev_printed) +
                  " (operator path authoritative)";
    out.push_back(std::move(r));
  }

  {
    const LiouvilleDensity rho =
        state_to_density(random_density(n, std::max<Index>(n - 1, 2), rng));
    double lo = 1.0, hi = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const double v = rho(sample_haar(n, rng));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const bool pass = lo >= -1e-12 && hi <= 1.0 + 1e-12;
    out.push_back({"frame-functions", "density positivity sampling", pass,
                   "range [" + detail::fmt_value(lo) + ", " +
                       detail::fmt_value(hi) + "]"});
  }
  return out;
}

inline std::vector<CheckResult> run_requantization_checks(
    const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  CounterRng rng(cfg.seed, 400, 0);

  std::vector<Index> kernel_dims{cfg.dims.first};
  if (cfg.dims.second != cfg.dims.first)
    kernel_dims.push_back(cfg.dims.second);
  for (Index n : kernel_dims) {
    ComplexMatrix mean = ComplexMatrix::Zero(n, n);
    RealMatrix m2 = RealMatrix::Zero(n, n);
    const std::uint64_t N = cfg.mc_samples;
    for (std::uint64_t i = 0; i < N; ++i) {
      const ComplexMatrix s =
          state_kernel(sample_haar(n, cfg.seed + 41, i)).matrix();
      const ComplexMatrix delta = s - mean;
      mean += delta / double(i + 1);
      m2 += delta.conjugate().cwiseProduct(s - mean).real();
    }
    const RealMatrix se =
        double(n) * (m2 / (double(N - 1) * double(N))).cwiseSqrt();
    const ComplexMatrix est = double(n) * mean;
    double worst = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const double dev = std::abs(est(i, j) - (i == j ? 1.0 : 0.0));
        worst = std::max(worst, dev / std::max(se(i, j), 1e-300));
      }
    out.push_back({"requantization",
                   "kernel completeness (n = " + std::to_string(n) + ")",
                   worst <= 3.0,
                   "worst z-score " + detail::fmt_value(worst) + " (bound 3)"});
  }

  {
    const Index n = cfg.dims.first;
    const DensityMatrix target = random_density(n, n, rng);
    const LiouvilleDensity rho = state_to_density(target);
    const int runs = 30;
    std::vector<ComplexMatrix> errors;
    for (int r = 0; r < runs; ++r)
      errors.push_back(mc_reconstruct_state(rho, cfg.mc_small,
                                            cfg.seed + 600 + r)
                           .estimate -
                       target.matrix());
    double worst_t = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (int part = 0; part < 2; ++part) {
          double mean = 0.0;
          for (const auto& e : errors)
            mean += part == 0 ? e(i, j).real() : e(i, j).imag();
          mean /= runs;
          double var = 0.0;
          for (const auto& e : errors) {
            const double x =
                (part == 0 ? e(i, j).real() : e(i, j).imag()) - mean;
            var += x * x;
          }
          var /= (runs - 1);
          if (var < 1e-30) continue;
          worst_t = std::max(worst_t, std::abs(mean / std::sqrt(var / runs)));
        }
    out.push_back({"requantization", "reconstruction unbiasedness",
                   worst_t <= 3.66,
                   "worst |t| " + detail::fmt_value(worst_t) +
                       " over 30 seeds (familywise 1% critical value 3.66, "
                       "Bonferroni over entry parts)"});
  }
  return out;
}

inline std::vector<CheckResult> run_composite_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const Index n = cfg.dims.first, m = cfg.dims.second;
  CounterRng rng(cfg.seed, 500, 0);

  {
    double dev = 0.0;
    for (int t = 0; t < 10; ++t) {
      const ComplexMatrix a = random_complex_matrix(n, n, rng);
      const ComplexMatrix b = random_complex_matrix(m, m, rng);
      dev = std::max(dev, hs_distance(diamond_product(s_map(a), s_map(b)).backing(),
                                      kron(a, b)));
      const ComplexMatrix c = random_complex_matrix(n, n, rng);
      dev = std::max(
          dev, hs_distance(
                   diamond_product(FrameFunction(a + c, double(n + 1)), s_map(b))
                       .backing(),
                   diamond_product(s_map(a), s_map(b)).backing() +
                       diamond_product(s_map(c), s_map(b)).backing()));
    }
    out.push_back(detail::bound_check("composite-systems",
                                      "diamond/tensor intertwining", dev,
                                      1e-12));
  }

  {
    double dev = 0.0;
    for (int t = 0; t < 20; ++t) {
      const FrameFunction rho =
          s_map(random_complex_matrix(n * m, n * m, rng), cfg.dims);
      for (Factor side : {Factor::second, Factor::first})
        dev = std::max(dev, std::abs(exact_integral(partial_integral(rho, side)) -
                                     exact_integral(rho)));
    }
    out.push_back(detail::bound_check("composite-systems",
                                      "partial-integral trace compatibility",
                                      dev, 1e-12));
  }

  {
    int agreements = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
      const FrameFunction f =
          s_map(random_hermitian(n * m, rng).matrix(), cfg.dims);
      const MCEstimate est =
          product_space_integral(f, cfg.mc_small, cfg.seed + 700 + t);
      if (std::abs(est.real() - exact_integral(f).real()) <=
          3.0 * est.std_error)
        ++agreements;
    }
    out.push_back({"composite-systems", "product-space integration",
                   agreements >= 19,
                   std::to_string(agreements) + "/" + std::to_string(trials) +
                       " within 3 standard errors"});
  }
  return out;
}

inline std::vector<CheckResult> run_entanglement_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> out;
  const Index n = cfg.dims.first, m = cfg.dims.second;
  CounterRng rng(cfg.seed, 800, 0);

  {
    bool pass = true;
    int zero_matches = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
      const bool product = t % 3 == 0;
      ComplexVector psi;
      if (product)
        psi = kron(sample_haar(n, rng).vector(), sample_haar(m, rng).vector());
      else
        psi = sample_haar(n * m, rng).vector();
      const LiouvilleDensity rho =
          state_to_density(DensityMatrix(psi * psi.adjoint()), cfg.dims);
      const double e = entanglement_pure_exact(rho);
      if (e < 0.0) pass = false;
      const bool rank_one =
          schmidt_rank(schmidt_decomposition(psi, cfg.dims), 1e-8) == 1;
      const bool e_zero = e <= 1e-10;
      if (rank_one == e_zero) ++zero_matches;
    }
    out.push_back({"entanglement", "E nonnegative, zero iff product",
                   pass && zero_matches == trials,
                   std::to_string(zero_matches) + "/100 rank/zero matches"});
  }

  {
    double dev = 0.0;
    for (int t = 0; t < 20; ++t) {
      const ComplexVector psi = sample_haar(n * m, rng).vector();
      const ComplexMatrix u = random_unitary(n, rng);
      const ComplexMatrix v = random_unitary(m, rng);
      const double before = entanglement_pure_exact(
          state_to_density(DensityMatrix(psi * psi.adjoint()), cfg.dims));
      const ComplexVector rotated = kron(u, v) * psi;
      const double after = entanglement_pure_exact(
          state_to_density(DensityMatrix(rotated * rotated.adjoint()),
                           cfg.dims));
      dev = std::max(dev, std::abs(before - after));
    }
    out.push_back(detail::bound_check("entanglement",
                                      "E local-unitary invariance", dev,
                                      1e-10));
  }

  {
    // continuity along a perturbation sequence
    const ComplexVector psi = sample_haar(n * m, rng).vector();
    ComplexVector dir = sample_haar(n * m, rng).vector();
    dir -= psi * psi.dot(dir);
    dir.normalize();
    const double base = entanglement_pure_exact(
        state_to_density(DensityMatrix(psi * psi.adjoint()), cfg.dims));
    double previous = 1e9;
    bool pass = true;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      ComplexVector perturbed = psi + eps * dir;
      perturbed.normalize();
      const double e = entanglement_pure_exact(state_to_density(
          DensityMatrix(perturbed * perturbed.adjoint()), cfg.dims));
      const double dev = std::abs(e - base);
      if (dev >= previous) pass = false;
      previous = dev;
    }
    out.push_back({"entanglement", "E continuity under perturbation",
                   pass && previous < 1e-4,
                   "final deviation " + detail::fmt_value(previous)});
  }

  {
    // mean-zero of the deviation function over the product space
    const ComplexVector psi = sample_haar(n * m, rng).vector();
    const LiouvilleDensity rho =
        state_to_density(DensityMatrix(psi * psi.adjoint()), cfg.dims);
    const DeviationFunction f(rho);
    MCAccumulator acc;
    for (std::uint64_t i = 0; i < cfg.mc_samples; ++i)
      acc.add(f(ProductPoint{sample_haar(n, cfg.seed + 900, i, 0),
                             sample_haar(m, cfg.seed + 900, i, 1)}));
    const MCEstimate est = acc.estimate(double(n) * double(m), cfg.seed + 900);
    const double z = std::abs(est.real()) / std::max(est.std_error, 1e-300);
    out.push_back({"entanglement", "deviation function mean zero", z <= 3.0,
                   "z-score " + detail::fmt_value(z) + " (bound 3)"});
  }

  {
    // measure consistency on pure states: the D upper bound vanishes exactly
    // when E does
    bool pass = true;
    SeparableDistanceOptions opts;
    opts.iterations = 60;
    opts.restarts = 1;
    opts.seed = cfg.seed + 1000;
    for (int t = 0; t < 30; ++t) {
      const bool product = t % 2 == 0;
      ComplexVector psi;
      if (product)
        psi = kron(sample_haar(n, rng).vector(), sample_haar(m, rng).vector());
      else
        psi = sample_haar(n * m, rng).vector();
      const LiouvilleDensity rho =
          state_to_density(DensityMatrix(psi * psi.adjoint()), cfg.dims);
      const double e = entanglement_pure_exact(rho);
      const double d = separable_distance_upper(rho, opts).l2_upper;
      if (d < -1e-12) pass = false;
      if (e <= 1e-10 && d > 1e-6) pass = false;
      if (e > 1e-6 && d <= 1e-10) pass = false;
    }
    out.push_back({"entanglement", "E/D consistency on pure states", pass,
                   "30 states compared"});
  }
  return out;
}

inline std::vector<CheckResult> run_all_checks(const CheckConfig& cfg) {
  std::vector<CheckResult> all;
  for (auto runner :
       {run_linear_core_checks, run_projective_checks,
        run_frame_function_checks, run_requantization_checks,
        run_composite_checks, run_entanglement_checks}) {
    const std::vector<CheckResult> part = runner(cfg);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace projqm
