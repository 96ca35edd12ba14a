#pragma once

// Classification pipelines on top of the subspace, pencil and group layers:
// the inductive classifier for Gr(d, AS_m(Z_p)), a registry of published
// representatives (stored verbatim in a compact family notation), the
// composition of the exponent-3 group tables up to order 3^8, and
// completeness audits of transversals.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pga/extdata.hpp"
#include "pga/grouplab.hpp"
#include "pga/pencil.hpp"
#include "pga/subspace.hpp"

namespace pga {

struct CatalogKey {
  int p = 3;
  int m = 0;
  int d = 0;
  auto operator<=>(const CatalogKey&) const = default;
  std::string to_string() const;  // "p,m,d"
};
// Parses "p,m,d"; throws InvalidInput.
CatalogKey parse_catalog_key(const std::string& s);

// ---------------------------------------------------------------------------
// Family notation. A family lists the strictly-upper entries of the generic
// element as "ij:form" items, e.g. "13:a,14:b,24:a" or "25:a+d,34:-d". The
// variables (single lower-case letters) are the basis parameters, taken in
// alphabetical order; each form is a signed sum of integer multiples of them.

// One form per variable, in alphabetical order of the variables.
std::vector<SkewForm> family_forms(int p, int m, const std::string& family);
// Span of family_forms; InvalidInput when the forms are dependent.
SkewSubspace subspace_from_family(int p, int m, const std::string& family);
// Family string of the canonical basis, with variables a, b, c, ...
std::string family_string(const SkewSubspace& V);
// Names of the variables in `family`, sorted.
std::string family_variables(const std::string& family);

// Polynomial text in single-letter variables with integer coefficients,
// juxtaposition for products, ^ for powers and parentheses, e.g.
// "c^2-ab+d^2" or "d(a+d)-b^2". Evaluated mod p at the point whose
// coordinates follow the order of `vars`; InvalidInput on syntax errors.
int eval_polynomial(const std::string& poly, const std::string& vars, const Vec& point, int p);

// ---------------------------------------------------------------------------
// Registry of published representatives.

struct RegistryEntry {
  CatalogKey key;
  std::string list;    // identifier of the published list the entry belongs to
  std::string label;   // published name, e.g. "V_{1.4.3}" or "(a.1)"
  std::string family;  // verbatim generic element
  std::string group;   // isoclass name of the realized group, e.g. "I_{8.1}"
  std::string pfaffian;                          // m = 4: Pfaffian of the generic element
  std::vector<std::string> principalPfaffians;   // m = 5: order-4 principal Pfaffians (up to sign)
  // Corrections to misprinted principal Pfaffians: index -> corrected text,
  // justified by the entry's own matrix. The printed text stays above.
  std::map<int, std::string> principalErrata;
  int rankDeficient = -1;                        // m = 5: #{X in V : rank X != 4}, zero included
  bool transversal = true;  // false for alternative names of an already listed class
};

// Every registered entry, in publication order within each list. Rank-one
// entries W_{m,k} are included for 2 <= m <= 7.
const std::vector<RegistryEntry>& paper_registry();
std::vector<RegistryEntry> registry_entries(const CatalogKey& key, bool transversalOnly = true);
bool registry_has(const CatalogKey& key);
SkewSubspace registry_subspace(const RegistryEntry& e);

// The three case-analysis families of 3-dimensional subspaces of AS_4:
//   Angle  <al,be,ga,de> = (13:a,23:b) + c (12:al, 14:be, 24:ga, 34:de)
//   Paren  (al,be,ga,de) = (13:a,24:b) + c (12:al, 14:be, 23:ga, 34:de)
//   Square [al,be,ga,de] = (13:a,14:b,24:a) + c (12:al, 13:be, 23:ga, 34:de)
enum class CaseFamily { Angle, Paren, Square };
SkewSubspace case_family(CaseFamily kind, int alpha, int beta, int gamma, int delta, int p = 3);
// The same family in family notation, variables a, b, c.
std::string case_family_string(CaseFamily kind, int alpha, int beta, int gamma, int delta, int p = 3);
// Parses "<1,0,0,0>", "(1,0,0,1)" or "[1,1,0,1]".
SkewSubspace case_family_from_string(const std::string& s, int p = 3);

// Group name -> datum for the names used in the tables: "I_1", "I_3",
// "I_{5.1}", ..., "I_{8.26}", "I_{7.9}", and products "A x B^k x ...".
ExtDatum datum_for_group_name(const std::string& name);
// Registered non-cyclic product claims (I_3 x I_3, I_3 x I_{5.1}, I_3 x I_{5.2}).
std::vector<std::string> registered_product_claims();

// ---------------------------------------------------------------------------
// Inductive classification.

constexpr std::uint64_t kDefaultCandidateBudget = 1ULL << 24;

struct ClassifyOptions {
  int jobs = 1;
  std::uint64_t seed = 1;
  int stabilizerSamples = 8;   // random stabilizer elements per base class
  std::uint64_t candidateBudget = kDefaultCandidateBudget;  // p^{dim AS_m - d + 1}
  std::uint64_t nodeBudget = kDefaultNodeBudget;
  bool withGroups = true;      // realize groups (presentation, fingerprint)
  std::uint64_t groupBudget = kDefaultGroupBudget;
};

struct ClassifyStats {
  std::uint64_t baseClasses = 0;
  std::uint64_t candidateLines = 0;   // projective points of AS_m / W, summed
  std::uint64_t candidateOrbits = 0;  // after the stabilizer-orbit reduction
  std::uint64_t congruenceTests = 0;
};

struct ClassRecord {
  CatalogKey key;
  SkewSubspace representative;
  Fingerprint fingerprint;
  std::optional<PencilType> pencilType;          // d = 2
  std::optional<Presentation> presentation;      // when groups are realized
  std::optional<GroupFingerprint> groupFingerprint;
  std::vector<std::string> labels;               // registry labels of congruent entries
  std::string group;                             // registry group name, if any
};

struct Catalog {
  CatalogKey key;
  std::vector<ClassRecord> records;
  nlohmann::json provenance;
};

// Complete, irredundant transversal of Gr(d, AS_m(Z_p)). d = 1 comes from
// skew normal forms; d > 1 extends every (d-1)-class representative W by
// one representative per orbit of sampled stabilizer elements of W on the
// lines of AS_m / W, then dedups by fingerprint buckets + congruent_search.
// Output is identical for every job count.
Catalog classify(int p, int m, int d, const ClassifyOptions& opt = {}, ClassifyStats* stats = nullptr);

// Elements S of GL_m with S W S^T = W: `count` seeded random ones obtained
// from congruent_search(W, R W R^T), followed by the elementary ones.
std::vector<Mat> stabilizer_sample(const SkewSubspace& W, int count, std::uint64_t seed,
                                   std::uint64_t nodeBudget = kDefaultNodeBudget);

nlohmann::json record_to_json(const ClassRecord& r);
nlohmann::json catalog_to_json(const Catalog& c);
// Aligned text: one block per record with the family notation.
std::string catalog_to_text(const Catalog& c);

// ---------------------------------------------------------------------------
// Verification against the registry.

struct ClauseResult {
  std::string name;
  bool ok = true;
  nlohmann::json detail;
};

struct TransversalReport {
  CatalogKey key;
  bool ok = true;
  std::vector<ClauseResult> clauses;
  nlohmann::json to_json() const;
};

// (a) registry members pairwise non-congruent, (b) classify output matches
// the registry class-for-class, (c) for d = 2 classify_dim2 agrees, (d) the
// stated Pfaffians / principal Pfaffians / N(V) are reproduced (a printed
// principal Pfaffian that fails is accepted only through a recorded erratum,
// and is reported as such). Aliases
// (non-transversal entries) must be congruent to some listed entry.
// InvalidInput when the registry has no entries for `key`.
TransversalReport verify_paper_transversal(const CatalogKey& key, const ClassifyOptions& opt = {});

// Number of elements of V (zero included) whose rank is not 4.
int rank_deficient_count(const SkewSubspace& V);

// ---------------------------------------------------------------------------
// Group tables.

struct AtlasGroup {
  int k = 0;  // |G| = 3^k
  int n = 0;  // |G'| = 3^n
  int m = 0;  // rank of G / G'
  std::string label;
  std::string source;  // "abelian", "subspace p,m,d #i", "nontrivial action"
  ExtDatum datum;
  GroupFingerprint fingerprint;
  bool decomposable = false;
  std::string evidence;      // why it is (in)decomposable
  bool labelVerified = false;  // fingerprint matches the labelled product / zp_split verdict
};

struct GroupAtlas {
  int maxK = 0;
  std::vector<AtlasGroup> groups;  // ordered by (k, n, source order)
  std::map<int, int> countByOrder;
  std::map<int, bool> fingerprintsDistinct;  // per order exponent k
  std::vector<std::string> notes;

  // (decomposable, indecomposable) counts per (k, n).
  std::map<std::pair<int, int>, std::pair<int, int>> split() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Catalogs may be supplied by key; missing ones are computed with classify
// unless `requireCatalogs`, in which case MissingCatalog is thrown.
GroupAtlas compose_tables(int maxK, const ClassifyOptions& opt = {},
                          const std::map<CatalogKey, Catalog>* catalogs = nullptr, bool requireCatalogs = false);

// ---------------------------------------------------------------------------
// Completeness audits.

enum class AuditMode { ExactOrbitStabilizer, MonteCarlo };

struct AuditOptions {
  AuditMode mode = AuditMode::ExactOrbitStabilizer;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  std::uint64_t stabilizerLimit = 100000000;
  int maxExactM = 4;  // exact mode refuses larger m (LimitExceeded)
  int jobs = 1;
};

struct AuditReport {
  CatalogKey key;
  AuditMode mode = AuditMode::ExactOrbitStabilizer;
  bool ok = false;
  BigInt expected = 0;                 // exact: Gaussian binomial
  BigInt total = 0;                    // exact: sum of orbit sizes
  std::vector<BigInt> orbitSizes;      // exact, in catalog order
  std::uint64_t samples = 0, seed = 0; // monte-carlo
  std::vector<nlohmann::json> unmatched;  // monte-carlo witnesses
  nlohmann::json to_json() const;
};

AuditReport completeness_audit(const Catalog& catalog, const AuditOptions& opt = {});

}  // namespace pga
