#pragma once

// Scenario files and the claim registry behind the command-line front end.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/serialize.hpp"
#include "finsler/structure.hpp"

namespace finsler {

inline constexpr const char* kToolName = "finslab";
inline constexpr const char* kToolVersion = "0.1.0";

struct ModuleEntry {
  std::string name;
  ModulePtr module;
  json spec;
  ModulePtr alternative;          // for rho_uniqueness
  std::optional<Ideal> ideal;     // for quotient_kernel
};

struct Scenario {
  std::optional<FdAlgebra> algebra;
  std::vector<ModuleEntry> modules;
  std::vector<std::string> checks;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::optional<GenConfig> gen;
  std::string output;
};

struct CheckContext {
  const ModuleEntry& entry;
  std::size_t samples;
  std::uint64_t seed;
};

struct ClaimInfo {
  std::string id;
  bool in_all;               // run under "all"
  bool commutative_only;     // needs a commutative base
  std::function<VerdictReport(const CheckContext&)> run;
};

inline VerdictReport check_akemann_identity(const FdAlgebra& a, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  VerdictReport r;
  r.claim = "akemann_identity";
  r.tolerance = 1e-8;
  r.samples = samples;
  r.seed = seed;
  r.module = "algebra " + a.to_string();
  for (std::size_t i = 0; i < samples; ++i) {
    const auto b = random_positive(a, rng), c = random_positive(a, rng);
    const auto w = akemann_gap_witness(b, c);
    const double target = norm(b - c);
    const double err = std::abs(w.achieved_gap - target);
    const double infeasible = std::max(0.0, norm(w.a) - 1.0) + std::max(0.0, w.achieved_gap - target - 1e-9);
    const double res = std::max(err, infeasible);
    if (res > r.max_residual) {
      r.max_residual = res;
      r.witness = json{{"kind", "akemann_identity"}, {"b", element_to_json(b)}, {"c", element_to_json(c)},
                       {"a", element_to_json(w.a)}, {"target", target}, {"achieved_gap", w.achieved_gap}};
    }
  }
  r.status = r.max_residual <= r.tolerance ? Status::Pass : Status::Fail;
  if (r.passed()) r.witness.reset();
  return r;
}

inline VerdictReport check_orthogonal_witness(const FdAlgebra& a, std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  VerdictReport r;
  r.claim = "orthogonal_witness";
  r.tolerance = 1e-12;
  r.samples = 0;
  r.seed = seed;
  r.module = "algebra " + a.to_string();
  for (auto n : a.dims()) {
    if (n < 2) continue;
    for (std::size_t i = 0; i < samples; ++i) {
      std::vector<cplx> xi(n);
      for (auto& z : xi) z = rng.complex_normal();
      detail::normalize(xi);
      r.max_residual = std::max(r.max_residual, orthogonal_witness(xi).max_residual());
      ++r.samples;
    }
  }
  if (r.samples == 0) r.note = "no block of dimension at least 2";
  r.status = r.max_residual <= r.tolerance ? Status::Pass : Status::Fail;
  return r;
}

inline const std::vector<ClaimInfo>& claim_registry() {
  static const std::vector<ClaimInfo> claims = {
      {"a_convexity", true, true, [](const CheckContext& c) { return check_a_convex(*c.entry.module, c.samples, c.seed); }},
      {"akemann_identity", true, false,
       [](const CheckContext& c) { return check_akemann_identity(c.entry.module->base(), c.samples, c.seed); }},
      {"banach_module", true, false,
       [](const CheckContext& c) { return check_banach_module(*c.entry.module, c.samples, c.seed); }},
      {"central_homogeneity", true, false,
       [](const CheckContext& c) { return check_central_homogeneity(*c.entry.module, c.samples, c.seed); }},
      {"commutative_triangle", true, true,
       [](const CheckContext& c) { return check_commutative_triangle(*c.entry.module, c.samples, c.seed); }},
      {"finsler_axiom2", true, false,
       [](const CheckContext& c) { return check_finsler_axiom2(*c.entry.module, c.samples, c.seed); }},
      {"hilbertize", false, false,
       [](const CheckContext& c) { return hilbertize(c.entry.module, c.samples, c.seed).to_report(); }},
      {"ideal_decomposition", true, false,
       [](const CheckContext& c) { return check_ideal_decomposition(c.entry.module->base(), c.samples, c.seed); }},
      {"linf_norm_property", true, true,
       [](const CheckContext& c) {
         return check_linf_norm_property(*c.entry.module, std::min<std::size_t>(c.samples, 50), c.seed);
       }},
      {"lipschitz_bound", true, false,
       [](const CheckContext& c) { return check_lipschitz_bound(*c.entry.module, c.samples, c.seed); }},
      {"norm_axioms", true, false,
       [](const CheckContext& c) { return check_norm_axioms(*c.entry.module, c.samples, c.seed); }},
      {"orthogonal_witness", true, false,
       [](const CheckContext& c) { return check_orthogonal_witness(c.entry.module->base(), 20, c.seed); }},
      {"parallelogram_mod_ideal", true, false,
       [](const CheckContext& c) { return check_parallelogram_mod_ideal(*c.entry.module, c.samples, c.seed); }},
      {"polarization", true, false,
       [](const CheckContext& c) { return check_polarization(*c.entry.module, c.samples, c.seed); }},
      {"quotient_kernel", true, false,
       [](const CheckContext& c) {
         const auto ideal = c.entry.ideal ? *c.entry.ideal : maximal_commutative_ideal(c.entry.module->base());
         return check_quotient_kernel(c.entry.module, ideal, std::min<std::size_t>(c.samples, 50), c.seed);
       }},
      {"rho_uniqueness", false, false,
       [](const CheckContext& c) {
         const ModulePtr alt = c.entry.alternative ? c.entry.alternative : c.entry.module;
         if (!(alt->shape() == c.entry.module->shape()) || !(alt->base() == c.entry.module->base())) {
           throw Error(ErrorKind::ConfigInvalid, "alternative module must share vectors and base");
         }
         return distinguishing_witness(
             *c.entry.module, [&](const ModuleVector& x) { return alt->rho_squared(x); }, c.samples, c.seed);
       }},
      {"structure_decomposition", true, false,
       [](const CheckContext& c) {
         return check_structure_decomposition(c.entry.module, std::min<std::size_t>(c.samples, 50), c.seed);
       }},
  };
  return claims;
}

inline const ClaimInfo* find_claim(const std::string& id) {
  for (const auto& c : claim_registry())
    if (c.id == id) return &c;
  return nullptr;
}

/// Line (1-based) containing byte offset `pos` of `text`.
inline std::size_t line_of_offset(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorKind::ConfigParse, source + ":" + std::to_string(line_of_offset(text, offset)) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigParse, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Default seed: CSTAR_SEED if set, else 1.
inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("CSTAR_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigInvalid, "CSTAR_SEED is not an unsigned integer");
    }
  }
  return 1;
}

inline Scenario scenario_from_json(const json& j, std::uint64_t seed) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "scenario must be a JSON object");
  static const std::set<std::string> keys{"schema_version", "algebra", "modules", "module", "checks",
                                          "samples",        "seed",    "gen",     "output", "description"};
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw Error(ErrorKind::ConfigInvalid, "unknown field '" + k + "'");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion) {
    throw Error(ErrorKind::ConfigInvalid, "unsupported schema_version " + j["schema_version"].dump());
  }
  Scenario s;
  try {
    s.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : seed;
    s.samples = j.value("samples", std::size_t{200});
    if (s.samples < 1) throw Error(ErrorKind::ConfigInvalid, "samples must be at least 1");
    s.output = j.value("output", std::string{});
    if (j.contains("algebra")) s.algebra = algebra_from_json(j["algebra"]);
    if (j.contains("gen")) s.gen = GenConfig::from_json(j["gen"], s.seed);

    json modules = json::array();
    if (j.contains("module")) modules.push_back(j["module"]);
    if (j.contains("modules")) {
      if (!j["modules"].is_array()) throw Error(ErrorKind::ConfigInvalid, "modules must be an array");
      for (const auto& m : j["modules"]) modules.push_back(m);
    }
    if (modules.empty()) throw Error(ErrorKind::ConfigInvalid, "scenario defines no module");
    for (std::size_t i = 0; i < modules.size(); ++i) {
      json spec = modules[i];
      ModuleEntry entry;
      entry.name = spec.value("name", "module" + std::to_string(i));
      if (spec.contains("alternative")) entry.alternative = module_from_json(spec["alternative"], s.seed);
      json body = spec.contains("spec") ? spec["spec"] : spec;
      if (body.value("family", std::string{}) == "generated" && s.gen && !body.contains("gen")) {
        body["gen"] = s.gen->to_json();
      }
      entry.module = module_from_json(body, s.seed);
      entry.spec = body;
      if (spec.contains("ideal")) {
        entry.ideal = Ideal(entry.module->base(), spec["ideal"].get<std::vector<std::size_t>>());
      }
      if (s.algebra && !(entry.module->base() == *s.algebra)) {
        throw Error(ErrorKind::ConfigInvalid, "module '" + entry.name + "' lives over " +
                                                  entry.module->base().to_string() + ", scenario algebra is " +
                                                  s.algebra->to_string());
      }
      s.modules.push_back(std::move(entry));
    }

    const json& checks = j.contains("checks") ? j["checks"] : json("all");
    if (checks.is_string()) {
      s.checks.push_back(checks.get<std::string>());
    } else if (checks.is_array()) {
      for (const auto& c : checks) s.checks.push_back(c.get<std::string>());
    } else {
      throw Error(ErrorKind::ConfigInvalid, "checks must be \"all\" or a list of claim identifiers");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
  for (const auto& c : s.checks) {
    if (c != "all" && find_claim(c) == nullptr) throw Error(ErrorKind::UnknownCheck, "unknown claim '" + c + "'");
  }
  return s;
}

inline Scenario load_scenario(const std::string& path, std::uint64_t seed) {
  return scenario_from_json(parse_json_text(read_text_file(path), path), seed);
}

/// Runs the requested claims on every module. Inapplicable explicit claims
/// produce a failing report that names the error.
inline std::vector<VerdictReport> run_scenario(const Scenario& s) {
  std::vector<VerdictReport> reports;
  for (std::size_t i = 0; i < s.modules.size(); ++i) {
    const auto& entry = s.modules[i];
    std::vector<const ClaimInfo*> todo;
    for (const auto& id : s.checks) {
      if (id == "all") {
        for (const auto& c : claim_registry()) {
          if (!c.in_all) continue;
          if (c.commutative_only && !entry.module->base().is_commutative()) continue;
          todo.push_back(&c);
        }
      } else {
        todo.push_back(find_claim(id));
      }
    }
    std::sort(todo.begin(), todo.end(), [](auto* a, auto* b) { return a->id < b->id; });
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    for (const auto* claim : todo) {
      VerdictReport r;
      try {
        r = claim->run({entry, s.samples, s.seed});
      } catch (const Error& e) {
        r.claim = claim->id;
        r.status = Status::Fail;
        r.max_residual = std::numeric_limits<double>::infinity();
        r.samples = 0;
        r.seed = s.seed;
        r.module = entry.module->family();
        r.note = e.what();
      }
      r.instance = i;
      reports.push_back(std::move(r));
    }
  }
  std::stable_sort(reports.begin(), reports.end(), [](const VerdictReport& a, const VerdictReport& b) {
    return a.claim != b.claim ? a.claim < b.claim : a.instance < b.instance;
  });
  return reports;
}

inline json report_document(const std::vector<VerdictReport>& reports, std::uint64_t seed) {
  json arr = json::array();
  std::size_t failed = 0;
  for (const auto& r : reports) {
    arr.push_back(r.to_json());
    if (!r.passed()) ++failed;
  }
  return json{{"schema_version", kSchemaVersion},
              {"tool", kToolName},
              {"tool_version", kToolVersion},
              {"generator", kGeneratorName},
              {"seed", seed},
              {"passed", reports.size() - failed},
              {"failed", failed},
              {"reports", arr}};
}

inline int exit_code(const std::vector<VerdictReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); }) ? 0 : 1;
}

/// One line per report: status, claim, instance, residual.
inline std::string human_table(const std::vector<VerdictReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-13s %-26s %-5s %-18s %-12s %s\n", "status", "claim", "inst", "module",
                "residual", "tolerance");
  out << line;
  for (const auto& r : reports) {
    std::string status = to_string(r.status);
    std::transform(status.begin(), status.end(), status.begin(), ::toupper);
    std::snprintf(line, sizeof line, "%-13s %-26s %-5zu %-18s %-12.3e %.0e", status.c_str(), r.claim.c_str(),
                  r.instance, r.module.substr(0, 18).c_str(), r.max_residual, r.tolerance);
    out << line;
    if (!r.note.empty() && r.note.size() < 80) out << "  " << r.note;
    out << "\n";
  }
  return out.str();
}

}  // namespace finsler
