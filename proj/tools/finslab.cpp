// finslab: batch front end for the Finsler module checkers.
//
//   finslab verify <scenario.json> [--json] [--out report.json]
//   finslab akemann --dims 1,2 --trials N --seed S [--search-iterations K]
//   finslab decompose <scenario.json>
//   finslab counterexample --algebra 1,2 --fiber p [--fiber-dim d]
//   finslab gen --seed S --out dir [--count N] [--config gen.json]
//
// Exit codes: 0 all claims pass, 1 some claim fails, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/finsler.hpp"

namespace fs = std::filesystem;
using namespace finsler;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write '" + path + "'");
  out << text;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) { return flag ? *flag : default_seed(); }

int cmd_verify(const std::string& path, bool as_json, const std::string& out, const std::optional<std::uint64_t>& seed) {
  const auto scenario = load_scenario(path, resolve_seed(seed));
  const auto reports = run_scenario(scenario);
  const auto doc = report_document(reports, scenario.seed);
  const std::string target = out.empty() ? scenario.output : out;
  if (!target.empty()) write_file(target, doc.dump(2) + "\n");
  if (as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << human_table(reports);
    std::cout << doc["passed"].get<std::size_t>() << " passed, " << doc["failed"].get<std::size_t>() << " failed\n";
  }
  return exit_code(reports);
}

int cmd_akemann(const std::vector<std::size_t>& dims, std::size_t trials, const std::optional<std::uint64_t>& seed_flag,
                std::size_t search_iterations, bool as_json) {
  if (dims.empty()) throw Error(ErrorKind::ConfigInvalid, "--dims needs at least one block");
  for (auto d : dims)
    if (d < 1) throw Error(ErrorKind::ConfigInvalid, "--dims entries must be positive");
  const FdAlgebra a(dims);
  const auto seed = resolve_seed(seed_flag);
  Rng rng(seed);
  double worst_witness = 0.0, worst_search = 0.0;
  bool feasible = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto b = random_positive(a, rng), c = random_positive(a, rng);
    const auto w = akemann_gap_witness(b, c);
    const double target = norm(b - c);
    worst_witness = std::max(worst_witness, std::abs(w.achieved_gap - target));
    if (search_iterations > 0) {
      const auto s = akemann_gap_search(b, c, rng.next(), {.iterations = search_iterations});
      worst_search = std::max(worst_search, w.achieved_gap - s.achieved_gap);
      feasible = feasible && s.achieved_gap <= target + 1e-9 && norm(s.a) <= 1.0 + 1e-10 && is_positive(s.a);
    }
  }
  const bool ok = worst_witness <= 1e-8 && feasible && (search_iterations == 0 || worst_search <= 1e-3);
  json doc{{"schema_version", kSchemaVersion},
           {"tool", kToolName},
           {"tool_version", kToolVersion},
           {"seed", seed},
           {"algebra", algebra_to_json(a)},
           {"trials", trials},
           {"max_witness_error", worst_witness},
           {"status", ok ? "pass" : "fail"}};
  if (search_iterations > 0) {
    doc["search_iterations"] = search_iterations;
    doc["max_search_shortfall"] = worst_search;
    doc["search_feasible"] = feasible;
  }
  if (as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%-6s akemann_identity  algebra %s  trials %zu  max |witness gap - target| %.3e\n", ok ? "PASS" : "FAIL",
                a.to_string().c_str(), trials, worst_witness);
    if (search_iterations > 0) {
      std::printf("       search (%zu iterations): max shortfall %.3e, feasible %s\n", search_iterations, worst_search,
                  feasible ? "yes" : "no");
    }
  }
  return ok ? 0 : kExitFail;
}

int cmd_decompose(const std::string& path, bool as_json, const std::optional<std::uint64_t>& seed) {
  const auto scenario = load_scenario(path, resolve_seed(seed));
  json out = json::array();
  bool ok = true;
  const std::size_t samples = std::min<std::size_t>(scenario.samples, 50);
  for (std::size_t i = 0; i < scenario.modules.size(); ++i) {
    const auto& entry = scenario.modules[i];
    json item{{"instance", i}, {"name", entry.name}, {"module", entry.module->family()}};
    try {
      const auto s = structure_decompose(entry.module, samples, scenario.seed);
      const bool good = s.max_residual() <= CanonicalDecomposition::kTol && s.glue_zero;
      ok = ok && good;
      item["status"] = good ? "pass" : "fail";
      item["decomposition"] = s.summary();
      if (!as_json) {
        std::printf("%-6s %s (%s over %s)\n", good ? "PASS" : "FAIL", entry.name.c_str(), entry.module->family().c_str(),
                    entry.module->base().to_string().c_str());
        std::printf("       E1 over C(X), |X| = %zu: %s\n", s.ideals.points.size(), s.points_zero ? "E1 = 0" : "nonzero");
        std::printf("       E2 over B = %s: %s, Hilbert %s\n", s.ideals.quotient.to_string().c_str(),
                    s.hilbert_zero ? "E2 = 0" : "nonzero", to_string(s.hilbert_inner.status).c_str());
        std::printf("       E0 over C(Y), |Y| = %zu: %s\n", s.ideals.glue_points.size(), s.glue_zero ? "E0 = 0" : "nonzero");
        std::printf("       round trip %.3e, module map %.3e, surjectivity %.3e\n", s.round_trip,
                    s.canonical.module_map_residual, s.canonical.surjectivity_residual);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::HilbertizeRefused) throw;
      ok = false;
      item["status"] = "fail";
      item["error"] = e.what();
      if (!as_json) std::printf("FAIL   %s: %s\n", entry.name.c_str(), e.what());
    }
    out.push_back(item);
  }
  if (as_json) {
    std::cout << json{{"schema_version", kSchemaVersion}, {"tool", kToolName}, {"tool_version", kToolVersion},
                      {"seed", scenario.seed}, {"decompositions", out}}
                     .dump(2)
              << "\n";
  }
  return ok ? 0 : kExitFail;
}

int cmd_counterexample(const std::vector<std::size_t>& dims, const std::string& fiber, std::size_t fiber_dim,
                       bool as_json, const std::optional<std::uint64_t>& seed_flag) {
  const FdAlgebra a(dims);
  const double p = double_from_json(fiber == "inf" ? json("inf") : json(std::stod(fiber)));
  const auto ce = gen_counterexample(a, p, fiber_dim);
  const auto seed = resolve_seed(seed_flag);
  const auto h = hilbertize(ce.module, 100, seed, {{ce.x, ce.y}});
  const auto axioms = check_finsler_axiom2(*ce.module, 100, seed);
  const bool ok = h.refused() && axioms.passed();
  json doc{{"schema_version", kSchemaVersion},
           {"tool", kToolName},
           {"tool_version", kToolVersion},
           {"seed", seed},
           {"algebra", algebra_to_json(a)},
           {"module", ce.module->describe()},
           {"witness", ce.witness_json()},
           {"reports", json::array({axioms.to_json(), h.to_report().to_json()})},
           {"status", ok ? "pass" : "fail"}};
  if (as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::printf("%-6s counterexample over %s with l^%s fibers of dimension %zu\n", ok ? "PASS" : "FAIL",
                a.to_string().c_str(), fiber.c_str(), fiber_dim);
    std::printf("       finsler_axiom2 %s (residual %.3e)\n", to_string(axioms.status).c_str(), axioms.max_residual);
    std::printf("       hilbertize %s, witness defect %.6f (fiber prediction %.6f)\n",
                h.refused() ? "refuses" : "accepts", ce.defect, ce.predicted);
  }
  return ok ? 0 : kExitFail;
}

int cmd_gen(const std::optional<std::uint64_t>& seed_flag, const std::string& out_dir, std::size_t count,
            const std::string& config_path) {
  GenConfig cfg;
  const auto seed = resolve_seed(seed_flag);
  if (!config_path.empty()) {
    cfg = GenConfig::from_json(parse_json_text(read_text_file(config_path), config_path), seed);
    if (seed_flag) cfg.seed = *seed_flag;
  } else {
    cfg.seed = seed;
  }
  cfg.validate();
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < count; ++i) {
    Generator g(cfg, i);
    char name[64];
    std::snprintf(name, sizeof name, "instance_%04zu.json", i);
    write_file((fs::path(out_dir) / name).string(), g.instance().dump(2) + "\n");
  }
  write_file((fs::path(out_dir) / "config.json").string(), cfg.to_json().dump(2) + "\n");
  std::printf("wrote %zu instances to %s\n", count, out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler module laboratory"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");
  std::optional<std::uint64_t> seed;

  auto* verify = app.add_subcommand("verify", "run the checks listed in a scenario");
  std::string scenario_path, out_path;
  verify->add_option("scenario", scenario_path, "scenario JSON file")->required();
  verify->add_option("--out", out_path, "report file (overrides the scenario's output)");
  verify->add_option("--seed", seed, "seed when the scenario has none (default $CSTAR_SEED or 1)");
  verify->add_flag("--json", as_json, "machine-readable output");

  auto* akemann = app.add_subcommand("akemann", "gap witnesses on random positive pairs");
  std::vector<std::size_t> dims;
  std::size_t trials = 100, search_iterations = 0;
  akemann->add_option("--dims", dims, "block sizes, e.g. 1,2")->delimiter(',')->required();
  akemann->add_option("--trials", trials, "number of random pairs")->check(CLI::PositiveNumber);
  akemann->add_option("--seed", seed, "seed (default $CSTAR_SEED or 1)");
  akemann->add_option("--search-iterations", search_iterations, "also run the search with this budget");
  akemann->add_flag("--json", as_json, "machine-readable output");

  auto* decompose = app.add_subcommand("decompose", "split each scenario module along the commutative ideal");
  decompose->add_option("scenario", scenario_path, "scenario JSON file")->required();
  decompose->add_option("--seed", seed, "seed when the scenario has none");
  decompose->add_flag("--json", as_json, "machine-readable output");

  auto* counter = app.add_subcommand("counterexample", "a Finsler module that is not Hilbert");
  std::vector<std::size_t> alg_dims;
  std::string fiber = "1";
  std::size_t fiber_dim = 2;
  counter->add_option("--algebra", alg_dims, "block sizes, e.g. 1,2")->delimiter(',')->required();
  counter->add_option("--fiber", fiber, "fiber exponent p, or inf")->required();
  counter->add_option("--fiber-dim", fiber_dim, "fiber dimension (>= 2)");
  counter->add_option("--seed", seed, "seed for the sampled checks");
  counter->add_flag("--json", as_json, "machine-readable output");

  auto* gen = app.add_subcommand("gen", "write seeded instance files");
  std::string gen_out, gen_config;
  std::size_t count = 10;
  gen->add_option("--seed", seed, "seed (default $CSTAR_SEED or 1)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--count", count, "number of instances");
  gen->add_option("--config", gen_config, "generator config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*verify) return cmd_verify(scenario_path, as_json, out_path, seed);
    if (*akemann) return cmd_akemann(dims, trials, seed, search_iterations, as_json);
    if (*decompose) return cmd_decompose(scenario_path, as_json, seed);
    if (*counter) return cmd_counterexample(alg_dims, fiber, fiber_dim, as_json, seed);
    if (*gen) return cmd_gen(seed, gen_out, count, gen_config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
