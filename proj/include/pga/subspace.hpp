#pragma once

// Subspaces of AS_m(Z_p) as points of a Grassmannian: canonical echelon
// representation, enumeration, congruence invariants, an exact congruence
// decision procedure, stabilizer counting and a brute-force orbit oracle.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "pga/skewform.hpp"

namespace pga {

using BigInt = boost::multiprecision::cpp_int;

struct SkewSubspace {
  int p = 3;
  int m = 0;
  int d = 0;
  Mat basis;  // d x m(m-1)/2, reduced row-echelon form

  int ambient_dim() const { return skew_dim(m); }
  std::vector<SkewForm> forms() const;
  // Element sum_i c_i X_i for a coefficient vector c of length d.
  SkewForm element(const Vec& c) const;

  bool operator==(const SkewSubspace& o) const {
    return p == o.p && m == o.m && d == o.d && basis.e == o.basis.e;
  }
  bool operator!=(const SkewSubspace& o) const { return !(*this == o); }
  // Lexicographic order on the RREF entries (the "key" order).
  bool operator<(const SkewSubspace& o) const;
};

SkewSubspace canonical_basis(int p, int m, const std::vector<SkewForm>& forms);
// Row space of a matrix whose rows are coordinate vectors.
SkewSubspace subspace_from_rows(int p, int m, const Mat& rows);
SkewSubspace zero_subspace(int p, int m);
SkewSubspace full_subspace(int p, int m);
// P V P^T
SkewSubspace transform(const SkewSubspace& V, const Mat& P);
// D x D matrix A with vec(P X P^T) = vec(X) A (row-vector convention).
Mat congruence_action_matrix(const Mat& P);
// V + span(X)
SkewSubspace extend(const SkewSubspace& V, const Vec& coordVector);
SkewSubspace pad_subspace(const SkewSubspace& V);
SkewSubspace random_subspace(int p, int m, int d, std::uint64_t seed);

// Gaussian binomial [D choose d]_p and |GL_m(Z_p)|.
BigInt subspace_count(int p, int D, int d);
BigInt gl_order(int p, int m);

constexpr std::uint64_t kDefaultEnumerationBudget = 100000000ULL;
constexpr std::uint64_t kDefaultNodeBudget = 1000000000ULL;

// Emits every d-dimensional subspace of AS_m exactly once: pivot tuples in
// lexicographic order, and for each tuple the free entries (row-major over
// the non-pivot positions right of each pivot) run as a base-p counter with
// the first free entry most significant.
void enumerate_subspaces(int p, int m, int d, const std::function<void(const Mat&)>& emit,
                         std::uint64_t budget = kDefaultEnumerationBudget);
std::vector<SkewSubspace> enumerate_subspaces_list(int p, int m, int d,
                                                   std::uint64_t budget = kDefaultEnumerationBudget);

// Multisets are stored as (value, count) pairs sorted by value.
template <class T>
using Profile = std::vector<std::pair<T, std::uint64_t>>;

struct Fingerprint {
  int radicalDim = 0;
  Profile<int> rankMultiset;             // ranks over projective elements of V
  Profile<int> lineperpProfile;          // dim u^{perp V} over projective u
  Profile<int> planePerpProfile;         // dim U^{perp V} over 2-dim U (m <= 5 only)
  std::int64_t pfZeroCount = -1;         // m = 4 only; -1 otherwise
  Profile<std::vector<int>> lineSignatureProfile;  // refined per-vector signature (see README)

  auto operator<=>(const Fingerprint&) const = default;
  bool operator==(const Fingerprint&) const = default;

  // Number of elements of rank < 4, counting zero: 1 + (p-1) * #projective.
  std::uint64_t low_rank_count(int p) const;
};

Fingerprint invariant_fingerprint(const SkewSubspace& V);

struct SearchOptions {
  std::uint64_t nodeBudget = kDefaultNodeBudget;
  bool prefilter = true;  // compare fingerprints before searching
};
struct SearchStats {
  std::uint64_t nodes = 0;
};

// Returns P with P V P^T = W, or nullopt if no invertible P exists.
std::optional<Mat> congruent_search(const SkewSubspace& V, const SkewSubspace& W, const SearchOptions& opt = {},
                                    SearchStats* stats = nullptr);
bool congruent(const SkewSubspace& V, const SkewSubspace& W, const SearchOptions& opt = {});

// #{P in GL_m : P V P^T = V}; throws LimitExceeded when above `limit`.
BigInt stabilizer_enumerate(const SkewSubspace& V, std::uint64_t limit, const SearchOptions& opt = {});

struct OrbitRecord {
  SkewSubspace representative;  // lexicographically least key in the orbit
  std::uint64_t orbitSize = 0;
};
std::vector<OrbitRecord> orbit_partition_exhaustive(int p, int m, int d,
                                                    std::uint64_t budget = kDefaultEnumerationBudget);
// Same partition with the orbit index of every subspace, listed in key order.
struct OrbitLabeling {
  std::vector<OrbitRecord> orbits;
  std::vector<SkewSubspace> members;
  std::vector<int> label;
};
OrbitLabeling orbit_labeling_exhaustive(int p, int m, int d, std::uint64_t budget = kDefaultEnumerationBudget);

nlohmann::json subspace_to_json(const SkewSubspace& V);
SkewSubspace subspace_from_json(const nlohmann::json& j);
nlohmann::json fingerprint_to_json(const Fingerprint& f);

// Enumerates coefficient vectors over Z_p^n; projective = first nonzero is 1.
std::vector<Vec> all_vectors(int p, int n, bool projective, bool includeZero = false);

}  // namespace pga
