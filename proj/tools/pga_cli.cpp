// Command-line front end: classifications, invariants of user-supplied
// subspaces, group realization and the verification suites.
//
// Exit status: 0 success / verified, 1 mismatch or runtime failure (budget
// exhausted and the like), 2 usage error or malformed input.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pga/atlas.hpp"

using namespace pga;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  int p = 3;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::uint64_t nodeBudget = kDefaultNodeBudget;
  std::uint64_t enumBudget = kDefaultEnumerationBudget;
  std::uint64_t stabilizerLimit = 100000000;
  std::uint64_t candidateBudget = kDefaultCandidateBudget;
  std::uint64_t groupBudget = kDefaultGroupBudget;
  std::string format = "json";
  std::string output;

  ClassifyOptions classify_options() const {
    ClassifyOptions o;
    o.jobs = jobs;
    o.seed = seed;
    o.nodeBudget = nodeBudget;
    o.candidateBudget = candidateBudget;
    o.groupBudget = groupBudget;
    return o;
  }
  bool text() const { return format == "text"; }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Accepted subspace inputs: the subspace JSON format, a family
// {"family": "13:a,24:b", "m": 4, "p": 3}, a case family
// {"named": "<1,0,0,0>"}, or a registry entry {"registry": "V_{1.4.3}", "key": "3,5,3"}.
SkewSubspace subspace_input(const json& j, int p) {
  if (!j.is_object()) throw UsageError("subspace input must be a JSON object");
  if (j.contains("family")) {
    if (!j.contains("m")) throw UsageError("family input needs \"m\"");
    return subspace_from_family(j.value("p", p), j.at("m").get<int>(), j.at("family").get<std::string>());
  }
  if (j.contains("named")) return case_family_from_string(j.at("named").get<std::string>(), j.value("p", p));
  if (j.contains("registry")) {
    const std::string label = j.at("registry").get<std::string>();
    for (const auto& e : paper_registry())
      if (e.label == label && (!j.contains("key") || e.key == parse_catalog_key(j.at("key").get<std::string>())))
        return registry_subspace(e);
    throw UsageError("no registry entry '" + label + "'");
  }
  if (j.contains("entries")) {  // a single form
    json g = j;
    if (!g.contains("p")) g["p"] = p;
    Mat X = mat_from_json(g);
    return canonical_basis(X.p, X.rows, {X});
  }
  return subspace_from_json(j);
}

void emit(const Config& cfg, const json& j, const std::string& text) {
  std::string body = cfg.text() ? text : j.dump(2) + "\n";
  if (cfg.output.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(cfg.output);
    if (!out) throw UsageError("cannot write '" + cfg.output + "'");
    out << body;
  }
}

std::string form_text(const SkewForm& X) {
  std::ostringstream os;
  for (int i = 0; i < X.rows; ++i) {
    for (int j = 0; j < X.cols; ++j) os << (j ? " " : "  ") << static_cast<int>(X.at(i, j));
    os << "\n";
  }
  return os.str();
}

// ---- subcommands -----------------------------------------------------------

int cmd_classify(const Config& cfg, int m, int d) {
  Catalog c = classify(cfg.p, m, d, cfg.classify_options());
  emit(cfg, catalog_to_json(c), catalog_to_text(c));
  return 0;
}

int cmd_pfaffian(const Config& cfg, const std::string& file) {
  SkewSubspace V = subspace_input(read_json_file(file), cfg.p);
  json j;
  j["m"] = V.m;
  j["d"] = V.d;
  j["forms"] = json::array();
  std::ostringstream os;
  int i = 0;
  for (const auto& X : V.forms()) {
    json f{{"form", mat_to_json(X)}, {"rank", skew_rank(X)}};
    os << "form " << ++i << " (rank " << skew_rank(X) << ")\n" << form_text(X);
    if (V.m == 4) {
      f["pfaffian"] = pfaffian4(X);
      os << "  pfaffian " << pfaffian4(X) << "\n";
    }
    if (V.m == 5) {
      f["principalPfaffians"] = principal_pfaffians(X);
      os << "  principal pfaffians";
      for (int v : principal_pfaffians(X)) os << " " << v;
      os << "\n";
    }
    j["forms"].push_back(f);
  }
  if (V.m == 4 || V.m == 5) {
    // Counts over all elements of V, zero included.
    int zeroPf = 0;
    for (const auto& c : all_vectors(V.p, V.d, false, true))
      if (V.m == 4 ? pfaffian4(V.element(c)) == 0 : skew_rank(V.element(c)) != 4) ++zeroPf;
    j[V.m == 4 ? "pfaffianZeroCount" : "rankDeficientCount"] = zeroPf;
    os << (V.m == 4 ? "elements with zero pfaffian: " : "N(V) = ") << zeroPf << "\n";
  }
  emit(cfg, j, os.str());
  return 0;
}

int cmd_pencil_type(const Config& cfg, const std::string& file) {
  json in = read_json_file(file);
  SkewForm A, B;
  if (in.is_object() && in.contains("A") && in.contains("B")) {
    A = mat_from_json(in.at("A"));
    B = mat_from_json(in.at("B"));
  } else {
    SkewSubspace V = subspace_input(in, cfg.p);
    if (V.d != 2) throw UsageError("pencil-type needs a 2-dimensional subspace or {\"A\":..,\"B\":..}");
    auto f = V.forms();
    A = f[0];
    B = f[1];
  }
  PencilType t = pencil_type(A, B);
  PencilType c = type_canonical_under_gl2(t);
  json j{{"type", pencil_type_to_json(t)}, {"canonicalType", pencil_type_to_json(c)}};
  emit(cfg, j, "type " + t.to_string() + "\ncanonical under GL_2: " + c.to_string() + "\n");
  return 0;
}

int cmd_congruent(const Config& cfg, const std::string& fa, const std::string& fb) {
  SkewSubspace V = subspace_input(read_json_file(fa), cfg.p), W = subspace_input(read_json_file(fb), cfg.p);
  SearchOptions so;
  so.nodeBudget = cfg.nodeBudget;
  SearchStats st;
  std::optional<Mat> P;
  if (V.p == W.p && V.m == W.m && V.d == W.d) P = congruent_search(V, W, so, &st);
  json j{{"congruent", P.has_value()}, {"P", P ? mat_to_json(*P) : json(nullptr)}, {"nodes", st.nodes}};
  std::string text = P ? "congruent\nP =\n" + form_text(*P) : "not congruent\n";
  emit(cfg, j, text);
  return 0;
}

int cmd_stabilizer(const Config& cfg, const std::string& file) {
  SkewSubspace V = subspace_input(read_json_file(file), cfg.p);
  SearchOptions so;
  so.nodeBudget = cfg.nodeBudget;
  BigInt order = stabilizer_enumerate(V, cfg.stabilizerLimit, so);
  BigInt orbit = gl_order(V.p, V.m) / order;
  json j{{"stabilizerOrder", order.str()}, {"orbitSize", orbit.str()}, {"glOrder", gl_order(V.p, V.m).str()}};
  emit(cfg, j, "stabilizer order " + order.str() + "\norbit size " + orbit.str() + "\n");
  return 0;
}

ExtDatum datum_input(const std::string& file) {
  json j = read_json_file(file);
  if (j.is_object() && j.contains("group")) return datum_for_group_name(j.at("group").get<std::string>());
  if (j.is_object() && !j.contains("gammas")) {
    // A subspace input realizes the trivial-action datum.
    return datum_from_subspace(subspace_input(j, j.value("p", 3)));
  }
  return datum_from_json(j);
}

int cmd_realize(const Config& cfg, const std::string& file) {
  ExtDatum D = datum_input(file);
  RealizedGroup G(D, cfg.groupBudget);
  GroupFingerprint f = group_fingerprint(G, cfg.groupBudget);
  auto z = zp_split(G);
  json j{{"order", G.order()},
         {"exponent", f.exponent},
         {"nilpotencyClass", nilpotency_class(G)},
         {"centralZpFactor", z.has_value()},
         {"loewyLength", loewy_length(D)},
         {"fingerprint", fingerprint_to_json(f)}};
  std::ostringstream os;
  os << "order " << G.order() << "\nexponent " << f.exponent << "\n|G'| " << f.derivedOrder << "\n|Z(G)| "
     << f.centerOrder << "\nnilpotency class " << nilpotency_class(G) << "\ncentral Z_p factor "
     << (z ? "yes" : "no") << "\nloewy length " << loewy_length(D) << "\n";
  emit(cfg, j, os.str());
  return 0;
}

int cmd_present(const Config& cfg, const std::string& file) {
  ExtDatum D = datum_input(file);
  Presentation P = emit_presentation(D);
  emit(cfg, P.to_json(), P.to_text());
  return 0;
}

// ---- verification suites ----------------------------------------------------

int suite_transversals(const Config& cfg) {
  std::set<CatalogKey> keys;
  for (const auto& e : paper_registry()) keys.insert(e.key);
  json reports = json::array();
  std::ostringstream os;
  bool ok = true;
  for (const auto& key : keys) {
    auto rep = verify_paper_transversal(key, cfg.classify_options());
    ok = ok && rep.ok;
    reports.push_back(rep.to_json());
    os << (rep.ok ? "PASS " : "FAIL ") << key.to_string() << " (" << registry_entries(key).size() << " classes)";
    for (const auto& c : rep.clauses)
      if (!c.ok) os << " [" << c.name << "]";
    os << "\n";
  }
  emit(cfg, json{{"suite", "transversals"}, {"ok", ok}, {"reports", reports}}, os.str());
  return ok ? 0 : 1;
}

int suite_tables(const Config& cfg) {
  GroupAtlas a = compose_tables(8, cfg.classify_options());
  const std::map<int, int> want{{1, 1}, {2, 1}, {3, 2}, {4, 2}, {5, 4}, {6, 8}, {7, 17}, {8, 45}};
  bool ok = a.countByOrder == want;
  json mismatches = json::array();
  for (const auto& [k, c] : want)
    if (a.countByOrder[k] != c) mismatches.push_back({{"order", k}, {"expected", c}, {"found", a.countByOrder[k]}});
  for (const auto& [k, d] : a.fingerprintsDistinct)
    if (!d) {
      ok = false;
      mismatches.push_back({{"order", k}, {"fingerprintsDistinct", false}});
    }
  for (const auto& g : a.groups)
    if (!g.labelVerified) {
      ok = false;
      mismatches.push_back({{"label", g.label}, {"labelVerified", false}, {"source", g.source}});
    }
  json j = a.to_json();
  j["suite"] = "tables";
  j["ok"] = ok;
  j["mismatches"] = mismatches;
  emit(cfg, j, a.to_text() + (ok ? "tables verified\n" : "tables MISMATCH\n"));
  return ok ? 0 : 1;
}

int suite_oracle(const Config& cfg) {
  // classify against the exhaustive orbit partition wherever it is feasible.
  json results = json::array();
  std::ostringstream os;
  bool ok = true;
  for (int m = 2; m <= 4; ++m)
    for (int d = 1; d <= skew_dim(m); ++d) {
      ClassifyOptions o = cfg.classify_options();
      o.withGroups = false;
      Catalog c = classify(cfg.p, m, d, o);
      auto orbits = orbit_partition_exhaustive(cfg.p, m, d, cfg.enumBudget);
      bool good = orbits.size() == c.records.size();
      json unmatched = json::array();
      for (const auto& orb : orbits) {
        int hits = 0;
        for (const auto& r : c.records) hits += congruent(orb.representative, r.representative);
        if (hits != 1) {
          good = false;
          unmatched.push_back({{"orbit", subspace_to_json(orb.representative)}, {"matches", hits}});
        }
      }
      ok = ok && good;
      results.push_back({{"key", {cfg.p, m, d}}, {"classify", c.records.size()}, {"oracle", orbits.size()},
                         {"ok", good}, {"unmatched", unmatched}});
      os << (good ? "PASS " : "FAIL ") << cfg.p << "," << m << "," << d << ": classify " << c.records.size()
         << ", oracle " << orbits.size() << "\n";
    }
  emit(cfg, json{{"suite", "oracle"}, {"ok", ok}, {"results", results}}, os.str());
  return ok ? 0 : 1;
}

int cmd_audit(const Config& cfg, const std::string& keyText, const std::string& mode, std::uint64_t samples,
              bool allowLong) {
  CatalogKey key = parse_catalog_key(keyText);
  ClassifyOptions o = cfg.classify_options();
  o.withGroups = false;
  Catalog c = classify(key.p, key.m, key.d, o);
  AuditOptions a;
  a.mode = mode == "exact" ? AuditMode::ExactOrbitStabilizer : AuditMode::MonteCarlo;
  a.samples = samples;
  a.seed = cfg.seed;
  a.stabilizerLimit = cfg.stabilizerLimit;
  a.jobs = cfg.jobs;
  if (allowLong) a.maxExactM = key.m;
  AuditReport r = completeness_audit(c, a);
  std::ostringstream os;
  os << (r.ok ? "PASS " : "FAIL ") << key.to_string() << " " << mode;
  if (a.mode == AuditMode::ExactOrbitStabilizer)
    os << ": sum of orbit sizes " << r.total.str() << ", expected " << r.expected.str();
  else
    os << ": " << r.samples << " samples, " << r.unmatched.size() << " unmatched";
  os << "\n";
  emit(cfg, r.to_json(), os.str());
  return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponent-p groups from alternating-matrix subspaces: classification and verification"};
  app.require_subcommand(1);
  app.footer(
      "Budgets can also be set through ATLAS_* environment variables (shown per option); flags win.\n"
      "Exit status: 0 success or verified, 1 mismatch or module failure, 2 usage error or invalid input.");
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--p", cfg.p, "prime")->envname("ATLAS_P")
        ->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "worker threads; output is identical for every value")
        ->envname("ATLAS_JOBS")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed for stabilizer sampling and audits")->envname("ATLAS_SEED")
        ->capture_default_str();
    sub->add_option("--node-budget", cfg.nodeBudget, "congruence search node budget")
        ->envname("ATLAS_NODE_BUDGET")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--enum-budget", cfg.enumBudget, "subspace enumeration budget")
        ->envname("ATLAS_ENUM_BUDGET")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--stabilizer-limit", cfg.stabilizerLimit, "stabilizer enumeration limit")
        ->envname("ATLAS_STABILIZER_LIMIT")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--candidate-budget", cfg.candidateBudget, "classify: max p^(dim AS_m - d + 1)")
        ->envname("ATLAS_CANDIDATE_BUDGET")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--group-budget", cfg.groupBudget, "max realized group order")
        ->envname("ATLAS_GROUP_BUDGET")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "json | text")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "text"}));
    sub->add_option("-o,--output", cfg.output, "write the artifact here instead of stdout");
  };

  int m = 0, d = 0;
  auto* classifyCmd = app.add_subcommand("classify", "transversal of Gr(d, AS_m(Z_p))");
  common(classifyCmd);
  classifyCmd->add_option("--m", m, "matrix size")->required()->check(CLI::Range(1, 9));
  classifyCmd->add_option("--d", d, "subspace dimension")->required()->check(CLI::NonNegativeNumber);

  std::string fileA, fileB;
  auto* pfCmd = app.add_subcommand("pfaffian", "ranks and (principal) Pfaffians of a subspace or form");
  common(pfCmd);
  pfCmd->add_option("file", fileA, "subspace / form JSON")->required();
  auto* pencilCmd = app.add_subcommand("pencil-type", "Kronecker type of a pencil");
  common(pencilCmd);
  pencilCmd->add_option("file", fileA, "2-dim subspace JSON or {\"A\":..,\"B\":..}")->required();
  auto* congCmd = app.add_subcommand("congruent", "decide congruence of two subspaces");
  common(congCmd);
  congCmd->add_option("a", fileA, "first subspace JSON")->required();
  congCmd->add_option("b", fileB, "second subspace JSON")->required();
  auto* stabCmd = app.add_subcommand("stabilizer", "stabilizer order and orbit size");
  common(stabCmd);
  stabCmd->add_option("file", fileA, "subspace JSON")->required();
  auto* realizeCmd = app.add_subcommand("realize", "order, exponent and fingerprint of G(D)");
  common(realizeCmd);
  realizeCmd->add_option("file", fileA, "datum JSON, subspace JSON or {\"group\": name}")->required();
  auto* presentCmd = app.add_subcommand("present", "presentation of G(D)");
  common(presentCmd);
  presentCmd->add_option("file", fileA, "datum JSON, subspace JSON or {\"group\": name}")->required();

  std::string suite;
  auto* verifyCmd = app.add_subcommand("verify", "run a verification suite");
  common(verifyCmd);
  verifyCmd->add_option("--suite", suite, "transversals | tables | oracle")
      ->required()
      ->check(CLI::IsMember({"transversals", "tables", "oracle"}));

  std::string key, mode = "mc";
  std::uint64_t samples = 10000;
  bool allowLong = false;
  auto* auditCmd = app.add_subcommand("audit", "completeness audit of a classify catalog");
  common(auditCmd);
  auditCmd->add_option("--key", key, "p,m,d")->required();
  auditCmd->add_option("--mode", mode, "exact | mc")
      ->capture_default_str()
      ->check(CLI::IsMember({"exact", "mc"}));
  auditCmd->add_option("--samples", samples, "Monte-Carlo samples")
      ->capture_default_str()->check(CLI::PositiveNumber);
  auditCmd->add_flag("--allow-long", allowLong, "permit exact audits beyond m = 4 (long-running)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!is_odd_prime(cfg.p)) throw UsageError("--p must be an odd prime");
    if (*classifyCmd) return cmd_classify(cfg, m, d);
    if (*pfCmd) return cmd_pfaffian(cfg, fileA);
    if (*pencilCmd) return cmd_pencil_type(cfg, fileA);
    if (*congCmd) return cmd_congruent(cfg, fileA, fileB);
    if (*stabCmd) return cmd_stabilizer(cfg, fileA);
    if (*realizeCmd) return cmd_realize(cfg, fileA);
    if (*presentCmd) return cmd_present(cfg, fileA);
    if (*verifyCmd) {
      if (suite == "transversals") return suite_transversals(cfg);
      if (suite == "tables") return suite_tables(cfg);
      return suite_oracle(cfg);
    }
    if (*auditCmd) return cmd_audit(cfg, key, mode, samples, allowLong);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidInput ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
