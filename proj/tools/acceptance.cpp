// Acceptance run: one PASS/FAIL line per headline criterion, with the
// measured values and wall time. Exit status 0 iff every criterion passes.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include "pga/atlas.hpp"

using namespace pga;

namespace {

// Collects the facts checked for one criterion; the first failure is kept as
// the reported reason.
struct Outcome {
  bool ok = true;
  std::ostringstream note;
  std::string failure;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) failure = what;
    ok = ok && cond;
  }
};

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "/" : "") << v[i];
  return os.str();
}

// Every oracle orbit is congruent to exactly one catalog representative and
// vice versa; the orbit sizes add up to the Gaussian binomial.
void match_against_oracle(Outcome& out, const std::vector<SkewSubspace>& reps, int m, int d) {
  auto orbits = orbit_partition_exhaustive(3, m, d);
  BigInt total = 0;
  std::vector<int> hitsPerRep(reps.size(), 0);
  for (const auto& orb : orbits) {
    total += orb.orbitSize;
    int hits = 0;
    for (size_t i = 0; i < reps.size(); ++i)
      if (congruent(orb.representative, reps[i])) {
        ++hits;
        ++hitsPerRep[i];
      }
    out.require(hits == 1, "oracle orbit of (3," + std::to_string(m) + "," + std::to_string(d) + ") matched " +
                               std::to_string(hits) + " classes");
  }
  for (int h : hitsPerRep) out.require(h == 1, "a class matched no oracle orbit");
  out.require(orbits.size() == reps.size(), "oracle orbit count differs");
  out.require(total == subspace_count(3, skew_dim(m), d), "oracle orbit sizes do not sum to the Gaussian binomial");
  out.note << " oracle(" << m << "," << d << ")=" << orbits.size() << " over " << total.str();
}

std::vector<SkewSubspace> representatives(const Catalog& c) {
  std::vector<SkewSubspace> r;
  for (const auto& rec : c.records) r.push_back(rec.representative);
  return r;
}

ClassifyOptions fast_options() {
  ClassifyOptions o;
  o.withGroups = false;
  return o;
}

void criterion1(Outcome& out) {
  std::mt19937_64 rng(1);
  std::vector<int> counts;
  for (int m = 2; m <= 6; ++m) {
    // Normal forms reached by skew_normalize: exhaustive for m <= 5, sampled
    // (plus every rank) for m = 6.
    std::set<int> ks;
    auto visit = [&](const SkewForm& X) {
      SkewNormal N = skew_normalize(X);
      out.require(congruent(N.P, X) == skew_normal_form(3, m, N.k), "skew_normalize certificate fails");
      ks.insert(N.k);
    };
    if (m <= 5) {
      for (const auto& v : all_vectors(3, skew_dim(m), false))
        if (std::any_of(v.begin(), v.end(), [](u8 x) { return x != 0; })) visit(skew_from_vec(3, m, v));
    } else {
      for (int t = 0; t < 20000; ++t) {
        Vec v(skew_dim(m));
        for (auto& x : v) x = static_cast<u8>(rng() % 3);
        if (std::any_of(v.begin(), v.end(), [](u8 x) { return x != 0; })) visit(skew_from_vec(3, m, v));
      }
      for (int k = 1; k <= m / 2; ++k)
        visit(congruent(random_invertible(3, m, rng), skew_normal_form(3, m, k)));
    }
    const int c = static_cast<int>(classify(3, m, 1, fast_options()).records.size());
    out.require(static_cast<int>(ks.size()) == m / 2, "skew_normalize class count wrong for m=" + std::to_string(m));
    out.require(c == m / 2, "classify(3," + std::to_string(m) + ",1) wrong");
    if (m <= 4) out.require(orbit_partition_exhaustive(3, m, 1).size() == static_cast<size_t>(m / 2), "BFS oracle wrong");
    counts.push_back(c);
  }
  out.note << "counts m=2..6: " << join(counts) << " (BFS oracle m<=4)";
}

void criterion2(Outcome& out) {
  const std::vector<size_t> want = {1, 4, 6, 14};
  std::vector<size_t> got;
  for (int m = 3; m <= 6; ++m) got.push_back(classify_dim2(3, m).size());
  out.require(got == want, "classify_dim2 counts " + join(got));
  std::vector<SkewSubspace> reps;
  for (const auto& c : classify_dim2(3, 4)) reps.push_back(canonical_basis(3, 4, {c.pair.A, c.pair.B}));
  match_against_oracle(out, reps, 4, 2);
  out.note.str("pencil classes m=3..6: " + join(got) + ";" + out.note.str());
}

void criterion3(Outcome& out) {
  for (int d : {3, 4}) {
    Catalog c = classify(3, 4, d, fast_options());
    out.require(c.records.size() == (d == 3 ? 6u : 4u), "classify(3,4," + std::to_string(d) + ") count");
    out.note << " classify(4," << d << ")=" << c.records.size() << ";";
    match_against_oracle(out, representatives(c), 4, d);
    auto rep = verify_paper_transversal({3, 4, d});
    out.require(rep.ok, "published transversal (3,4," + std::to_string(d) + ") does not verify");
    out.note << " published matrices+Pfaffians " << (rep.ok ? "ok" : "FAIL") << ";";
  }
}

void criterion4(Outcome& out) {
  Catalog c = classify(3, 5, 3, fast_options());
  out.require(c.records.size() == 22, "classify(3,5,3) count");
  auto rep = verify_paper_transversal({3, 5, 3});
  out.require(rep.ok, "published (3,5,3) transversal does not verify");
  int trivialRadical = 0, padded = 0;
  std::map<int, int> strata;
  for (const auto& e : registry_entries({3, 5, 3})) {
    SkewSubspace V = registry_subspace(e);
    (invariant_fingerprint(V).radicalDim == 0 ? trivialRadical : padded)++;
    const int n = rank_deficient_count(V);
    ++strata[n];
    if (e.label == "V_{2.3}") out.require(n == 11, "N(V_{2.3}) != 11");
  }
  out.require(trivialRadical == 16 && padded == 6, "16 + 6 split");
  // The coinciding names V_{1.1.2} = V_{1.1.3} = V_{1.3.2} = V_{1.2.0}.
  int aliases = 0;
  SkewSubspace base;
  for (const auto& e : registry_entries({3, 5, 3}))
    if (e.label == "V_{1.1.2}") base = registry_subspace(e);
  for (const auto& e : registry_entries({3, 5, 3}, false))
    if (!e.transversal) {
      ++aliases;
      out.require(congruent(registry_subspace(e), base), e.label + " not congruent to V_{1.1.2}");
    }
  out.require(aliases == 3, "expected three alternative names");
  AuditOptions a;
  a.mode = AuditMode::MonteCarlo;
  a.samples = 10000;
  AuditReport mc = completeness_audit(c, a);
  out.require(mc.ok && mc.unmatched.empty(), "Monte-Carlo audit found unmatched samples");
  out.note << "classes " << c.records.size() << " (" << trivialRadical << " trivial radical + " << padded
           << " padded); N strata";
  for (const auto& [n, k] : strata) out.note << " " << n << ":" << k;
  out.note << "; " << aliases + 1 << " coinciding names congruent; MC " << mc.samples << " samples, " << mc.unmatched.size()
           << " unmatched";
}

void criterion5(Outcome& out) {
  out.require(gl_order(3, 4) == BigInt(24261120), "|GL_4(Z_3)|");
  for (int d : {2, 3, 4}) {
    AuditReport r = completeness_audit(classify(3, 4, d, fast_options()));
    out.require(r.ok && r.total == r.expected, "exact audit (3,4," + std::to_string(d) + ")");
    out.note << (d == 2 ? "" : ", ") << "d=" << d << ": " << r.total.str() << "/" << r.expected.str();
  }
  out.note << " (|GL_4| = " << gl_order(3, 4).str() << "; (3,5,3) exact audit is flag-gated)";
}

void criterion6(Outcome& out) {
  int data = 0, cocycles = 0, disagreements = 0, expYes = 0, expNo = 0, nontrivial = 0;
  for (const auto& en : corpus::make_corpus(2024, 20)) {
    const ExtDatum& D = en.D;
    if (D.p != 3) continue;
    ++data;
    nontrivial += !D.trivial_action();
    const bool lin = cocycle_validate(D).ok;
    if (lin != cocycle_identity_exhaustive(D)) ++disagreements;
    if (!lin) continue;
    ++cocycles;
    RealizedGroup G(D);
    const bool exp3 = exponent_p_test(D).ok;
    if (exp3 != (group_exponent(G) == 3)) ++disagreements;
    (exp3 ? expYes : expNo)++;
    auto coords = derived_coordinates(G);
    if (!coords || *coords != derived_submodule(D)) ++disagreements;
  }
  out.require(data >= 500, "corpus smaller than 500");
  out.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
  out.note << data << " data (" << nontrivial << " nontrivial actions), " << cocycles << " cocycles, exponent 3: "
           << expYes << " yes / " << expNo << " no; " << disagreements << " disagreements";
}

void criterion7(Outcome& out) {
  GroupAtlas a = compose_tables(8);
  std::vector<int> counts;
  for (int k = 3; k <= 8; ++k) counts.push_back(a.countByOrder[k]);
  out.require(counts == std::vector<int>({2, 2, 4, 8, 17, 45}), "isoclass counts " + join(counts));
  for (int k = 1; k <= 8; ++k) out.require(a.fingerprintsDistinct[k], "fingerprint collision at order 3^" + std::to_string(k));
  std::set<GroupFingerprint> n4;
  int n4Groups = 0;
  for (const auto& g : a.groups)
    if (g.k == 8 && g.n == 4) {
      ++n4Groups;
      n4.insert(g.fingerprint);
    }
  out.require(n4Groups == 5 && n4.size() == 5, "order 3^8, |G'| = 3^4 stratum");
  for (const auto& g : a.groups) out.require(g.labelVerified, "label " + g.label + " not verified");
  out.note << "counts 3^3..3^8: " << join(counts) << "; fingerprints distinct per order; 3^8 n=4 stratum "
           << n4.size() << "/" << n4Groups << " distinct";
}

void criterion8(Outcome& out) {
  ExtDatum D = datum_i79();
  RealizedGroup G(D);
  const auto exp = group_exponent(G);
  const auto derived = derived_subgroup(G).size();
  const int cls = nilpotency_class(G), l = loewy_length(D);
  const bool split = zp_split(G).has_value();
  out.require(exp == 3 && G.order() == 2187 && derived == 81 && cls == 3 && l == 2 && !split, "I_{7.9} invariants");
  out.require(l <= cls && cls <= l + 1, "l <= c <= l + 1");
  out.note << "exponent " << exp << ", |G| " << G.order() << ", |G'| " << derived << ", class " << cls
           << ", Loewy length " << l << ", zp_split " << (split ? "found" : "none");
}

void criterion9(Outcome& out) {
  for (CatalogKey k : {CatalogKey{3, 4, 3}, CatalogKey{3, 5, 3}, CatalogKey{3, 6, 2}}) {
    std::string ref;
    for (int jobs : {1, 4, 1, 4}) {
      ClassifyOptions o;
      o.jobs = jobs;
      Catalog c = classify(k.p, k.m, k.d, o);
      std::string s = catalog_to_json(c).dump(2) + catalog_to_text(c);
      if (ref.empty()) ref = s;
      out.require(s == ref, "classify " + k.to_string() + " output differs for --jobs " + std::to_string(jobs));
    }
    out.note << k.to_string() << " ";
  }
  out.note << "byte-identical over runs with jobs 1/4/1/4";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"rank-1 classification", criterion1},     {"pencil classification", criterion2},
      {"Gr(3|4, AS_4(Z_3))", criterion3},         {"Gr(3, AS_5(Z_3))", criterion4},
      {"orbit-stabilizer audit", criterion5},    {"cocycle / exponent / derived vs brute force", criterion6},
      {"group tables", criterion7},              {"I_{7.9} properties", criterion8},
      {"determinism", criterion9},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.failure = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << i + 1 << ": " << (out.ok ? "PASS" : "FAIL") << "  " << criteria[i].first << " — "
              << out.note.str();
    if (!out.ok) std::cout << " [" << out.failure << "]";
    std::cout << " (" << static_cast<int>(secs + 0.5) << " s)" << std::endl;
    failures += !out.ok;
  }
  return failures == 0 ? 0 : 1;
}
