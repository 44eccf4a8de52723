// Batch front end: load operators and states from JSON, run quantization,
// reconstruction, entanglement, and invariant suites, and emit deterministic
// machine-readable reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "projqm/checks.hpp"
#include "projqm/projqm.hpp"

using namespace projqm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInvariantFailure = 3;

struct RunConfig {
  std::string input;
  double kappa = 0.0;  // 0 = default n+1, resolved after the input is read
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  int budget = 300;
  std::string map = "auto";
  std::string format = "json";
  std::string dims_flag;
  bool project = false;
  std::map<std::string, double> tolerances;
};

double tol_or(const RunConfig& cfg, const std::string& key, double fallback) {
  const auto it = cfg.tolerances.find(key);
  return it == cfg.tolerances.end() ? fallback : it->second;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in '" + path +
                                "': " + std::string(e.what()));
  }
  return j;
}

Dims parse_dims_flag(const std::string& flag) {
  Index n = 0, m = 0;
  char comma = 0;
  std::istringstream is(flag);
  if (!(is >> n >> comma >> m) || comma != ',')
    throw std::invalid_argument("--dims expects the form n,m");
  return Dims(n, m);
}

struct LoadedOperator {
  ComplexMatrix matrix;
  std::optional<Dims> dims;
};

LoadedOperator load_operator(const RunConfig& cfg) {
  const json j = read_json_file(cfg.input);
  LoadedOperator out;
  out.matrix = matrix_from_json(j);
  out.dims = dims_from_json(j);
  if (out.matrix.rows() <= 2)
    throw std::invalid_argument(
        "operator dimension " + std::to_string(out.matrix.rows()) +
        " is not supported: the operator/function correspondence requires "
        "dimension > 2");
  if (!cfg.dims_flag.empty()) {
    const Dims flag_dims = parse_dims_flag(cfg.dims_flag);
    if (out.dims && !(*out.dims == flag_dims))
      throw std::invalid_argument("--dims disagrees with the input's dims");
    if (flag_dims.total() != out.matrix.rows())
      throw std::invalid_argument("--dims is inconsistent with the operator size");
    out.dims = flag_dims;
  }
  return out;
}

double resolve_kappa(const RunConfig& cfg, Index n) {
  const double kappa = cfg.kappa > 0.0 ? cfg.kappa : double(n + 1);
  if (kappa <= 0) throw std::invalid_argument("kappa must be positive");
  return kappa;
}

DensityMatrix as_density(const RunConfig& cfg, const ComplexMatrix& m) {
  return DensityMatrix(m, tol_or(cfg, "herm", kHermitianTol),
                       tol_or(cfg, "density_eig", kDensityEigenvalueTol),
                       tol_or(cfg, "density_trace", kDensityTraceTol));
}

bool is_density(const RunConfig& cfg, const ComplexMatrix& m) {
  try {
    as_density(cfg, m);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

json base_report(const char* command, const RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = cfg.seed;
  return j;
}

json cmd_to_function(const RunConfig& cfg) {
  const LoadedOperator in = load_operator(cfg);
  const Index n = in.matrix.rows();
  const double kappa = resolve_kappa(cfg, n);
  std::string map = cfg.map;
  if (map == "auto") map = is_density(cfg, in.matrix) ? "state" : "observable";

  FrameFunction f = [&]() -> FrameFunction {
    if (map == "state") {
      const DensityMatrix sigma = as_density(cfg, in.matrix);
      if (kappa == double(n + 1)) return state_to_density(sigma).function();
      return state_to_density_function(sigma, kappa);
    }
    const HermitianOperator a(in.matrix, tol_or(cfg, "herm", kHermitianTol));
    return observable_to_function(a, kappa);
  }();

  json j = base_report("to-function", cfg);
  j["map"] = map;
  j["kappa"] = kappa;
  j["dim"] = n;
  j["function"] = frame_function_to_json(f);
  if (in.dims) j["function"]["dims"] = {in.dims->first, in.dims->second};
  json samples = json::array();
  for (std::uint64_t i = 0; i < 8; ++i) {
    const ProjectivePoint p = sample_haar(n, cfg.seed, i, /*stream=*/1);
    const Complex v = f(p);
    json entry;
    entry["index"] = i;
    entry["value"] = v.imag() == 0.0
                         ? json(v.real())
                         : json{{"re", v.real()}, {"im", v.imag()}};
    samples.push_back(std::move(entry));
  }
  j["sampled_values"] = std::move(samples);
  return j;
}

json cmd_to_operator(const RunConfig& cfg) {
  const json input = read_json_file(cfg.input);
  const FrameFunction f = frame_function_from_json(input);
  const Index n = f.dim();
  const double kappa = cfg.kappa > 0.0 ? cfg.kappa : f.kappa();
  std::string map = cfg.map;
  if (map == "auto")
    map = is_density(cfg, f.backing()) && kappa == double(n + 1)
              ? "state"
              : "observable";

  json j = base_report("to-operator", cfg);
  j["map"] = map;
  j["kappa"] = kappa;
  j["dim"] = n;
  if (map == "state") {
    const ComplexMatrix closed = state_matrix_from_density(f, kappa);
    const LiouvilleDensity rho = state_to_density(as_density(cfg, closed));
    const OperatorEstimate est =
        mc_reconstruct_state(rho, cfg.samples, cfg.seed);
    j["reconstruction"] = operator_estimate_to_json(est);
    j["closed_form"] = matrix_to_json(closed);
    j["hs_deviation"] = hs_distance(est.estimate, closed);
    j["projected"] = cfg.project;
    if (cfg.project)
      j["projected_state"] =
          matrix_to_json(nearest_density(est.estimate).matrix());
  } else {
    const OperatorEstimate est =
        mc_reconstruct_observable(f, kappa, cfg.samples, cfg.seed);
    const ComplexMatrix closed = operator_from_function(f, kappa);
    j["reconstruction"] = operator_estimate_to_json(est);
    j["closed_form"] = matrix_to_json(closed);
    j["hs_deviation"] = hs_distance(est.estimate, closed);
    j["projected"] = false;
  }
  return j;
}

json cmd_purity(const RunConfig& cfg) {
  const LoadedOperator in = load_operator(cfg);
  const DensityMatrix sigma = as_density(cfg, in.matrix);
  const LiouvilleDensity rho = state_to_density(sigma);
  const PurityVerdict verdict = purity_check(rho, tol_or(cfg, "purity", 1e-10));

  json j = base_report("purity", cfg);
  j["dim"] = sigma.dim();
  j["squared_norm"] = verdict.squared_norm;
  j["pure_threshold"] = 2.0 / double(sigma.dim() + 1);
  j["verdict"] = verdict.pure ? "pure" : "mixed";
  j["mc"] = estimate_to_json(purity_mc(rho, cfg.samples, cfg.seed));
  return j;
}

json cmd_entanglement(const RunConfig& cfg) {
  const LoadedOperator in = load_operator(cfg);
  if (!in.dims)
    throw std::invalid_argument(
        "entanglement analysis needs a bipartite factorization: provide "
        "\"dims\" in the input or --dims n,m");
  const Dims dims = *in.dims;
  const DensityMatrix sigma = as_density(cfg, in.matrix);
  const LiouvilleDensity rho = state_to_density(sigma, dims);

  json j = base_report("entanglement", cfg);
  j["dims"] = {dims.first, dims.second};
  const PurityVerdict purity = purity_check(rho, tol_or(cfg, "purity", 1e-10));
  j["purity"] = {{"squared_norm", purity.squared_norm},
                 {"verdict", purity.pure ? "pure" : "mixed"}};

  const PptResult ppt = ppt_check(sigma, dims);
  j["ppt"] = ppt.verdict == PptVerdict::ppt ? "ppt" : "npt";

  std::vector<std::uint64_t> seeds{cfg.seed};
  if (purity.pure) {
    j["E_pure_exact"] = entanglement_pure_exact(rho);
    const MCEstimate mc = entanglement_pure_mc(rho, cfg.samples, cfg.seed + 1);
    seeds.push_back(cfg.seed + 1);
    j["E_mc"] = estimate_to_json(mc);
  } else {
    j["E_pure_exact"] = nullptr;
    j["E_mc"] = nullptr;
  }

  RoofOptions roof_opts;
  roof_opts.budget = cfg.budget;
  roof_opts.seed = cfg.seed + 2;
  seeds.push_back(cfg.seed + 2);
  j["E_roof_upper"] = entanglement_roof(sigma, dims, roof_opts).upper_bound;

  SeparableDistanceOptions d_opts;
  d_opts.iterations = cfg.budget;
  d_opts.restarts = 2;
  d_opts.seed = cfg.seed + 3;
  seeds.push_back(cfg.seed + 3);
  j["D_upper"] = separable_distance_upper(rho, d_opts).l2_upper;

  bool violated = false;
  if (purity.pure) {
    const EigenDecomposition eig = eigen_decomposition(sigma.hermitian());
    const Index rank = schmidt_rank(
        schmidt_decomposition(eig.eigenvectors.col(0), dims), 1e-8);
    if (rank >= 2) {
      const Witness w = schmidt_witness(rho);
      const WitnessEvaluation ev =
          witness_evaluate(w, rho, cfg.samples, cfg.seed + 4);
      seeds.push_back(cfg.seed + 4);
      violated = ev.violated;
    }
  } else {
    const SeparabilityReport report = sep_necessary_test(rho, 8, cfg.seed + 4);
    seeds.push_back(cfg.seed + 4);
    violated = report.verdict == SeparabilityVerdict::entangled_certified;
  }
  j["witness_violation"] = violated;
  j["seeds"] = seeds;
  return j;
}

json cmd_witness(const RunConfig& cfg) {
  const LoadedOperator in = load_operator(cfg);
  if (!in.dims)
    throw std::invalid_argument(
        "witness construction needs a bipartite factorization: provide "
        "\"dims\" in the input or --dims n,m");
  const Dims dims = *in.dims;
  const LiouvilleDensity rho =
      state_to_density(as_density(cfg, in.matrix), dims);

  const Witness w = schmidt_witness(rho);
  const WitnessEvaluation ev = witness_evaluate(w, rho, cfg.samples, cfg.seed);

  double product_min = std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const ComplexVector prod =
        kron(sample_haar(dims.first, cfg.seed, t, /*stream=*/5).vector(),
             sample_haar(dims.second, cfg.seed, t, /*stream=*/6).vector());
    product_min =
        std::min(product_min, prod.dot(w.observable.matrix() * prod).real());
  }

  json j = base_report("witness", cfg);
  j["dims"] = {dims.first, dims.second};
  j["witness"] = matrix_to_json(w.observable.matrix(), std::optional<Dims>(dims));
  j["largest_schmidt_sq"] = w.largest_schmidt_sq;
  j["target_exact"] = ev.exact;
  j["violated"] = ev.violated;
  j["mc"] = estimate_to_json(ev.mc);
  j["product_sample_min"] = product_min;
  return j;
}

json cmd_check(const RunConfig& cfg, bool& all_pass) {
  Dims dims(3, 3);
  if (!cfg.dims_flag.empty()) dims = parse_dims_flag(cfg.dims_flag);
  CheckConfig check_cfg;
  check_cfg.dims = dims;
  check_cfg.seed = cfg.seed;
  check_cfg.mc_samples = cfg.samples;
  check_cfg.mc_small = std::max<std::uint64_t>(cfg.samples / 5, 1000);

  const std::vector<CheckResult> results = run_all_checks(check_cfg);
  all_pass = true;
  json j = base_report("check", cfg);
  j["dims"] = {dims.first, dims.second};
  json arr = json::array();
  for (const CheckResult& r : results) {
    arr.push_back({{"module", r.module},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"detail", r.detail}});
    if (!r.pass) all_pass = false;
  }
  j["results"] = std::move(arr);
  j["all_pass"] = all_pass;
  return j;
}

void render_text(const json& j, std::ostream& os) {
  if (j.contains("results")) {
    os << j.at("command").get<std::string>() << " (version "
       << j.at("version").get<std::string>() << ")\n";
    for (const auto& r : j.at("results")) {
      os << (r.at("pass").get<bool>() ? "PASS" : "FAIL") << "  "
         << r.at("module").get<std::string>() << ": "
         << r.at("name").get<std::string>() << " -- "
         << r.at("detail").get<std::string>() << "\n";
    }
    os << (j.at("all_pass").get<bool>() ? "all checks passed"
                                        : "some checks FAILED")
       << "\n";
    return;
  }
  for (const auto& [key, value] : j.items())
    os << key << ": " << value.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "projqm -- geometric Hamiltonian quantum mechanics on projective space"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> tolerance_args;

  const auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input)
      sub->add_option("input", cfg.input, "input JSON file")->required();
    sub->add_option("--kappa", cfg.kappa,
                    "quantization parameter (default n+1)");
    sub->add_option("--samples", cfg.samples, "Monte-Carlo sample count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "random seed (64-bit)");
    sub->add_option("--budget", cfg.budget,
                    "optimizer budget for roof/distance searches")
        ->check(CLI::PositiveNumber);
    sub->add_option("--dims", cfg.dims_flag, "bipartite split n,m");
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--tolerance", tolerance_args,
                    "tolerance override key=value (repeatable)");
  };

  CLI::App* to_function =
      app.add_subcommand("to-function", "inverse-quantize an operator JSON");
  add_common(to_function, true);
  to_function->add_option("--map", cfg.map, "which map to apply")
      ->check(CLI::IsMember({"auto", "state", "observable"}));

  CLI::App* to_operator = app.add_subcommand(
      "to-operator", "Monte-Carlo re-quantization of a frame-function JSON");
  add_common(to_operator, true);
  to_operator->add_option("--map", cfg.map, "which kernel to smear with")
      ->check(CLI::IsMember({"auto", "state", "observable"}));
  to_operator->add_flag("--project", cfg.project,
                        "also report the nearest-density projection");

  CLI::App* purity =
      app.add_subcommand("purity", "purity verdict for a state JSON");
  add_common(purity, true);

  CLI::App* entanglement = app.add_subcommand(
      "entanglement", "full entanglement report for a bipartite state");
  add_common(entanglement, true);

  CLI::App* witness = app.add_subcommand(
      "witness", "construct and evaluate a Schmidt witness for a pure state");
  add_common(witness, true);

  CLI::App* check =
      app.add_subcommand("check", "run the module invariant suites");
  add_common(check, false);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const std::string& t : tolerance_args) {
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--tolerance expects key=value, got '" + t +
                                    "'");
      cfg.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }

    json report;
    int exit_code = kExitOk;
    if (to_function->parsed()) {
      report = cmd_to_function(cfg);
    } else if (to_operator->parsed()) {
      report = cmd_to_operator(cfg);
    } else if (purity->parsed()) {
      report = cmd_purity(cfg);
    } else if (entanglement->parsed()) {
      report = cmd_entanglement(cfg);
    } else if (witness->parsed()) {
      report = cmd_witness(cfg);
    } else if (check->parsed()) {
      bool all_pass = false;
      report = cmd_check(cfg, all_pass);
      if (!all_pass) exit_code = kExitInvariantFailure;
    }

    if (cfg.format == "text")
      render_text(report, std::cout);
    else
      std::cout << report.dump(2) << "\n";
    return exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
