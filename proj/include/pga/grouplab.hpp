#pragma once

// Explicit finite groups G(D) = A x_{rho,phi} H realized from extension data:
// multiplication on packed element codes, inverses, element orders, derived
// subgroup, center, lower central series, conjugacy classes, isomorphism
// fingerprints, splitting off central Z_p factors and presentations.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pga/extdata.hpp"

namespace pga {

struct GroupElement {
  Vec a;  // coordinates in A = Z_p^n
  Vec h;  // exponents in H = Z_p^m
  bool operator==(const GroupElement& o) const { return a == o.a && h == o.h; }
};

constexpr std::uint64_t kDefaultGroupBudget = 6561;  // 3^8

class RealizedGroup {
 public:
  using Code = std::uint32_t;

  // Throws BudgetExceeded when p^{m+n} > budget; the datum is validated.
  explicit RealizedGroup(ExtDatum D, std::uint64_t budget = kDefaultGroupBudget);

  const ExtDatum& datum() const { return D_; }
  int p() const { return D_.p; }
  std::uint64_t order() const { return order_; }

  // Code = aCode + p^n hCode, digits least significant first.
  Code encode(const GroupElement& x) const;
  GroupElement decode(Code c) const;
  Code identity() const { return 0; }
  // (a_i, 0) for i < n, then (0, h_r).
  std::vector<Code> generators() const;

  Code mul(Code x, Code y) const;
  Code inv(Code x) const { return inv_[x]; }
  Code pow(Code x, std::uint64_t k) const;
  // x y x^{-1} y^{-1}
  Code comm(Code x, Code y) const { return mul(mul(x, y), mul(inv_[x], inv_[y])); }
  std::uint64_t element_order(Code x) const;

  GroupElement multiply(const GroupElement& x, const GroupElement& y) const;
  GroupElement inverse(const GroupElement& x) const;

 private:
  std::uint32_t a_add(std::uint32_t x, std::uint32_t y) const;
  std::uint32_t h_add(std::uint32_t x, std::uint32_t y) const;

  ExtDatum D_;
  std::uint64_t order_ = 1;
  std::uint32_t qa_ = 1, qh_ = 1;       // p^n, p^m
  std::vector<std::uint32_t> act_;      // act_[h * qa + b] = rho(h) b
  std::vector<std::uint32_t> phi_;      // phi_[h * qh + k] = phi(h, k)
  std::vector<Code> inv_;
};

// Subgroup generated by `gens` (sorted codes).
std::vector<RealizedGroup::Code> subgroup_closure(const RealizedGroup& G, const std::vector<RealizedGroup::Code>& gens);
// Normal closure in G of the subgroup generated by `gens`.
std::vector<RealizedGroup::Code> normal_closure(const RealizedGroup& G, const std::vector<RealizedGroup::Code>& gens);

std::uint64_t group_exponent(const RealizedGroup& G);
std::vector<RealizedGroup::Code> derived_subgroup(const RealizedGroup& G);
std::vector<RealizedGroup::Code> center(const RealizedGroup& G);
// Coordinates (RREF rows) of G' when G' lies inside (A, 0); nullopt otherwise.
std::optional<Mat> derived_coordinates(const RealizedGroup& G);
// Orders |G_1| = |G|, |G_2| = |G'|, ..., ending with 1.
std::vector<std::uint64_t> lower_central_orders(const RealizedGroup& G);
int nilpotency_class(const RealizedGroup& G);
// Sizes of the conjugacy classes, as size -> count.
std::map<std::uint64_t, std::uint64_t> conjugacy_class_sizes(const RealizedGroup& G);

struct GroupFingerprint {
  std::uint64_t order = 1;
  std::uint64_t exponent = 1;
  std::uint64_t derivedOrder = 1;
  std::uint64_t centerOrder = 1;
  std::vector<std::uint64_t> lowerCentralOrders;
  std::map<std::uint64_t, std::uint64_t> conjClassSizes;    // size -> count
  std::map<std::uint64_t, std::uint64_t> centralizerOrders;  // order -> number of classes
  std::uint64_t derivedMeetCenterOrder = 1;
  // Over the G-invariant linear functionals f on G' (zero included; G' must
  // be elementary abelian inside (A, 0), otherwise both stay empty):
  // c(f) = #{x : f([x, g]) = 0 for all g}, i.e. |G| / |G : preimage of
  // Z(G / ker f)|, counted as c(f) -> number of f.
  std::map<std::uint64_t, std::uint64_t> centralKernelProfile;
  // For each x the multiset {c(f) : f([x, G]) = 0}; counted over x.
  std::map<std::map<std::uint64_t, std::uint64_t>, std::uint64_t> elementSignatureProfile;
  // For pairs (f, g) with R_f = {x : f([x, G]) = 0}: the triple
  // (c(f), c(g), #{x in R_f : g([x, R_f]) = 0}), counted over pairs.
  std::map<std::array<std::uint64_t, 3>, std::uint64_t> functionalPairProfile;
  // |C_G(x) n C_G(y)| -> number of ordered pairs (x, y).
  std::map<std::uint64_t, std::uint64_t> centralizerPairProfile;

  auto operator<=>(const GroupFingerprint&) const = default;
};

// Throws BudgetExceeded when |G| > budget.
GroupFingerprint group_fingerprint(const RealizedGroup& G, std::uint64_t budget = kDefaultGroupBudget);
// Fingerprint of G1 x G2 composed from the factors' fingerprints.
GroupFingerprint fingerprint_product(const GroupFingerprint& f1, const GroupFingerprint& f2);
nlohmann::json fingerprint_to_json(const GroupFingerprint& f);

struct ZpSplit {
  GroupElement z;                          // central, order p, outside G'
  std::vector<RealizedGroup::Code> complement;  // normal subgroup of index p avoiding z
};
// For G of exponent p: a central Z_p direct factor and its complement, or none.
std::optional<ZpSplit> zp_split(const RealizedGroup& G);

// A word in a_1..a_n (indices 0..n-1) and h_1..h_m (indices n..n+m-1).
using Word = std::vector<std::pair<int, int>>;

struct Relator {
  enum class Kind { Power, Commutator };
  Kind kind = Kind::Power;
  int g1 = 0, g2 = 0;  // Power: g1^p; Commutator: [g1, g2]
  Word rhs;            // the relator reads lhs = rhs
};

struct Presentation {
  int p = 3, m = 0, n = 0;
  std::vector<Relator> relators;
  std::string generator_name(int g) const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

// Relators a_i^p = 1, h_r^p = phi_rr (= 1 for exponent-p data), [a_i, a_j], [h_r, a_i] = rho(h_r) a_i - a_i and
// [h_r, h_s] = phi_rs, written additively in the a's.
Presentation emit_presentation(const ExtDatum& D);
// Every relator holds in G(D) (so the presented group maps onto G(D)), and the
// relator set has the polycyclic shape that bounds the presented group's order
// by p^{m+n}; together these make the presentation exact.
bool presentation_defines_group(const Presentation& P, const RealizedGroup& G);

}  // namespace pga
