#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "pga/grouplab.hpp"

using namespace pga;

namespace {

Vec v(std::initializer_list<int> xs) {
  Vec out;
  for (int x : xs) out.push_back(static_cast<u8>(x));
  return out;
}

// G_{m,k}: trivial action, n = 1, Phi = the rank-2k normal form in AS_m.
ExtDatum g_mk(int m, int k) {
  return datum_from_subspace(canonical_basis(3, m, {skew_normal_form(3, m, k)}));
}

ExtDatum from_forms(int m, const std::vector<SkewForm>& forms) {
  return datum_from_subspace(canonical_basis(3, m, forms));
}

SkewForm up(int m, const std::vector<UpperEntry>& e) { return skew_from_upper(3, m, e); }

// Corpus data that are 2-cocycles (so the realized product is a group).
std::vector<ExtDatum> group_corpus(std::uint64_t seed) {
  std::vector<ExtDatum> out;
  for (const auto& en : corpus::make_corpus(seed))
    if (cocycle_validate(en.D).ok) out.push_back(en.D);
  return out;
}

Vec sub(const Vec& a, const Vec& b, int p) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = static_cast<u8>(modp(a[i] - b[i], p));
  return r;
}

}  // namespace

TEST_CASE("identity and inverse laws on every element") {
  for (const auto& D : group_corpus(7)) {
    RealizedGroup G(D);
    for (RealizedGroup::Code x = 0; x < G.order(); ++x) {
      CHECK(G.mul(G.identity(), x) == x);
      CHECK(G.mul(x, G.identity()) == x);
      REQUIRE(G.mul(x, G.inv(x)) == G.identity());
      REQUIRE(G.mul(G.inv(x), x) == G.identity());
    }
  }
}

TEST_CASE("associativity fuzz: 10^5 random triples per corpus group") {
  std::mt19937_64 rng(99);
  int groups = 0;
  for (const auto& D : group_corpus(8)) {
    RealizedGroup G(D);
    bool ok = true;
    for (int t = 0; t < 100000 && ok; ++t) {
      RealizedGroup::Code x = rng() % G.order(), y = rng() % G.order(), z = rng() % G.order();
      ok = G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z));
    }
    CHECK(ok);
    ++groups;
  }
  CHECK(groups > 30);
}

TEST_CASE("I_3 commutator and the commutator formula") {
  RealizedGroup G(datum_i3());
  GroupElement h1{v({0}), v({1, 0})}, h2{v({0}), v({0, 1})};
  GroupElement c = G.multiply(G.multiply(h1, h2), G.multiply(G.inverse(h1), G.inverse(h2)));
  CHECK(c == GroupElement{v({1}), v({0, 0})});

  // [(a,k),(b,h)] = ((1 - h)a + (k - 1)b + phi(k,h) - phi(h,k), 1).
  std::mt19937_64 rng(5);
  for (const auto& D : group_corpus(9)) {
    RealizedGroup R(D);
    for (int t = 0; t < 50; ++t) {
      GroupElement x = R.decode(rng() % R.order()), y = R.decode(rng() % R.order());
      GroupElement got = R.decode(R.comm(R.encode(x), R.encode(y)));
      const Vec &a = x.a, &k = x.h, &b = y.a, &h = y.h;
      Vec term1 = sub(a, D.gamma_of(h).apply(a), D.p);
      Vec term2 = sub(D.gamma_of(k).apply(b), b, D.p);
      Vec term3 = sub(cocycle_eval(D, k, h), cocycle_eval(D, h, k), D.p);
      Vec want(D.n);
      for (int i = 0; i < D.n; ++i) want[i] = static_cast<u8>((term1[i] + term2[i] + term3[i]) % D.p);
      CHECK(got == GroupElement{want, Vec(D.m, 0)});
    }
  }
}

TEST_CASE("group_exponent") {
  CHECK(group_exponent(RealizedGroup(ExtDatum::trivial(3, 2, 2))) == 3);
  ExtDatum F = ExtDatum::trivial(3, 2, 1);
  F.set_phi(0, 0, v({1}));
  RealizedGroup GF(F);
  CHECK(group_exponent(GF) == 9);
  CHECK(GF.pow(GF.encode({v({0}), v({1, 0})}), 3) == GF.encode({v({1}), v({0, 0})}));
  CHECK(group_exponent(RealizedGroup(datum_i79())) == 3);
  CHECK(group_exponent(RealizedGroup(ExtDatum::trivial(5, 1, 2))) == 5);
}

TEST_CASE("derived subgroup and center") {
  RealizedGroup I3(datum_i3());
  CHECK(derived_subgroup(I3).size() == 3);
  CHECK(center(I3).size() == 3);
  RealizedGroup E(ExtDatum::trivial(3, 2, 1));
  CHECK(derived_subgroup(E).size() == 1);
  CHECK(center(E).size() == E.order());
  RealizedGroup I79(datum_i79());
  CHECK(derived_subgroup(I79).size() == 81);
  auto Z = center(I79);
  CHECK(Z.size() == 3);
  // The center is the socle of A.
  Mat soc = socle(datum_i79());
  for (auto z : Z) {
    GroupElement g = I79.decode(z);
    CHECK(g.h == Vec(3, 0));
    CHECK(rank(vstack(soc, stack_rows({g.a}, 3, 4))) == soc.rows);
  }
}

TEST_CASE("property: derived subgroup is abelian and inside A") {
  for (const auto& D : group_corpus(10)) {
    RealizedGroup G(D);
    auto der = derived_subgroup(G);
    for (auto x : der) CHECK(G.decode(x).h == Vec(D.m, 0));
    bool abelian = true;
    for (size_t i = 0; i < der.size() && abelian; ++i)
      for (size_t j = i + 1; j < der.size() && abelian; ++j)
        abelian = G.mul(der[i], der[j]) == G.mul(der[j], der[i]);
    CHECK(abelian);
    // The center consists exactly of the elements commuting with everything.
    auto Z = center(G);
    std::vector<char> inZ(G.order(), 0);
    for (auto z : Z) inZ[z] = 1;
    for (RealizedGroup::Code x = 0; x < G.order(); x += 7) {
      bool c = true;
      for (RealizedGroup::Code y = 0; y < G.order() && c; ++y) c = G.mul(x, y) == G.mul(y, x);
      CHECK(c == static_cast<bool>(inZ[x]));
    }
  }
}

TEST_CASE("nilpotency class") {
  CHECK(nilpotency_class(RealizedGroup(ExtDatum::trivial(3, 2, 1))) == 1);
  CHECK(nilpotency_class(RealizedGroup(datum_i3())) == 2);
  CHECK(nilpotency_class(RealizedGroup(datum_i79())) == 3);
  CHECK(loewy_length(datum_i79()) == 2);
  CHECK(lower_central_orders(RealizedGroup(datum_i79())) == std::vector<std::uint64_t>{2187, 81, 3, 1});
}

TEST_CASE("property: exponent-3 groups have class <= 3, and <= 2 when m + n <= 6") {
  int n = 0;
  for (const auto& D : group_corpus(11)) {
    if (D.p != 3 || !exponent_p_test(D).ok) continue;
    RealizedGroup G(D);
    REQUIRE(group_exponent(G) == 3);
    int c = nilpotency_class(G);
    CHECK(c <= 3);
    if (D.m + D.n <= 6) CHECK(c <= 2);
    int l = loewy_length(D);
    CHECK(l <= c);
    CHECK(c <= l + 1);
    ++n;
  }
  CHECK(n > 10);
}

TEST_CASE("group fingerprints") {
  auto Z33 = group_fingerprint(RealizedGroup(ExtDatum::trivial(3, 2, 1)));
  auto I3 = group_fingerprint(RealizedGroup(datum_i3()));
  CHECK(Z33.derivedOrder == 1);
  CHECK(I3.derivedOrder == 3);
  CHECK(Z33 != I3);
  CHECK(I3.conjClassSizes == std::map<std::uint64_t, std::uint64_t>{{1, 3}, {3, 8}});
  // The two planes of AS_4 spanned by (x13 + x24, x14) and (x13 + x24, x14 - x23).
  auto g61 = group_fingerprint(RealizedGroup(from_forms(4, {up(4, {{1, 3, 1}, {2, 4, 1}}), up(4, {{1, 4, 1}})})));
  auto g62 = group_fingerprint(
      RealizedGroup(from_forms(4, {up(4, {{1, 3, 1}, {2, 4, 1}}), up(4, {{1, 4, 1}, {2, 3, -1}})})));
  CHECK(g61 != g62);
  CHECK_THROWS_AS(group_fingerprint(RealizedGroup(ExtDatum::trivial(3, 4, 4)), 729), Error);
  CHECK_THROWS_AS(RealizedGroup(ExtDatum::trivial(3, 5, 4)), Error);
}

TEST_CASE("property: fingerprints compose over direct products") {
  auto gs = group_corpus(12);
  std::mt19937_64 rng(4);
  int n = 0;
  for (int t = 0; t < 40; ++t) {
    const auto& A = gs[rng() % gs.size()];
    const auto& B = gs[rng() % gs.size()];
    if (A.p != B.p) continue;
    std::uint64_t order = 1;
    for (int i = 0; i < A.m + A.n + B.m + B.n; ++i) order *= A.p;
    if (order > 6561) continue;
    auto f = group_fingerprint(RealizedGroup(product_datum(A, B)));
    CHECK(f == fingerprint_product(group_fingerprint(RealizedGroup(A)), group_fingerprint(RealizedGroup(B))));
    ++n;
  }
  CHECK(n > 5);
}

TEST_CASE("property: fingerprints are invariant under change of basis") {
  std::mt19937_64 rng(13);
  for (const auto& D : group_corpus(14)) {
    if (!exponent_p_test(D).ok) continue;
    ExtDatum E = change_basis(D, random_invertible(D.p, D.m, rng), random_invertible(D.p, D.n, rng));
    CHECK(group_fingerprint(RealizedGroup(E)) == group_fingerprint(RealizedGroup(D)));
  }
}

TEST_CASE("zp_split") {
  RealizedGroup G31(g_mk(3, 1));
  auto s = zp_split(G31);
  REQUIRE(s.has_value());
  CHECK(s->complement.size() == 27);
  auto z = G31.encode(s->z);
  CHECK(G31.element_order(z) == 3);
  auto der = derived_subgroup(G31);
  CHECK_FALSE(std::binary_search(der.begin(), der.end(), z));
  // The complement is I_3: nonabelian of order 27.
  bool nonabelian = false;
  for (auto x : s->complement)
    for (auto y : s->complement) nonabelian = nonabelian || G31.mul(x, y) != G31.mul(y, x);
  CHECK(nonabelian);

  RealizedGroup G42(g_mk(4, 2));
  CHECK_FALSE(zp_split(G42).has_value());
  CHECK(center(G42).size() == 3);

  RealizedGroup E(ExtDatum::trivial(3, 2, 1));
  auto se = zp_split(E);
  REQUIRE(se.has_value());
  CHECK(se->complement.size() == 9);
  CHECK_FALSE(zp_split(RealizedGroup(datum_i3())).has_value());
  CHECK_FALSE(zp_split(RealizedGroup(datum_i79())).has_value());
}

TEST_CASE("property: zp_split complements are normal subgroups of index p") {
  for (const auto& D : group_corpus(15)) {
    RealizedGroup G(D);
    if (group_exponent(G) != static_cast<std::uint64_t>(D.p)) continue;
    auto s = zp_split(G);
    if (!s) continue;
    const auto& M = s->complement;
    CHECK(M.size() * D.p == G.order());
    auto z = G.encode(s->z);
    CHECK_FALSE(std::binary_search(M.begin(), M.end(), z));
    for (auto g : G.generators())
      for (auto x : M) {
        auto c = G.mul(G.mul(g, x), G.inv(g));
        REQUIRE(std::binary_search(M.begin(), M.end(), c));
      }
  }
}

TEST_CASE("emit_presentation") {
  auto P3 = emit_presentation(datum_i3());
  CHECK(P3.to_text() == "a1^3=1\nh1^3=1\nh2^3=1\n[h1,a1]=1\n[h2,a1]=1\n[h1,h2]=a1\n");
  auto P79 = emit_presentation(datum_i79());
  std::string t = P79.to_text();
  for (const char* line : {"[h1,a1]=a4\n", "[h2,a2]=a4\n", "[h3,a3]=a4\n", "[h1,h2]=a3\n", "[h1,h3]=a2^2\n",
                           "[h2,h3]=a1\n", "[h1,a2]=1\n"})
    CHECK(t.find(line) != std::string::npos);
  auto Pab = emit_presentation(ExtDatum::trivial(3, 2, 2));
  for (const auto& r : Pab.relators) CHECK(r.rhs.empty());
  CHECK(Pab.relators.size() == 2 + 2 + 1 + 4 + 1);
  CHECK(P79.to_json()["relators"].size() == P79.relators.size());
}

TEST_CASE("property: presentations hold in and define the realized group") {
  for (const auto& D : group_corpus(16)) {
    RealizedGroup G(D);
    auto P = emit_presentation(D);
    CHECK(presentation_defines_group(P, G));
    // Dropping a relator or corrupting one breaks the certificate.
    if (!P.relators.empty()) {
      auto Q = P;
      Q.relators.pop_back();
      CHECK_FALSE(presentation_defines_group(Q, G));
    }
    if (D.m >= 2 && D.n >= 1) {
      auto Q = P;
      auto& last = Q.relators.back();
      if (last.rhs.empty())
        last.rhs.push_back({0, 1});
      else
        last.rhs[0].second = (last.rhs[0].second + 1) % D.p;
      CHECK_FALSE(presentation_defines_group(Q, G));
    }
  }
}

TEST_CASE("fingerprint JSON") {
  auto j = fingerprint_to_json(group_fingerprint(RealizedGroup(datum_i3())));
  CHECK(j["order"] == 27);
  CHECK(j["derivedOrder"] == 3);
  CHECK(j["lowerCentralOrders"] == nlohmann::json::array({27, 3, 1}));
}
