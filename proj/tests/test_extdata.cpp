#include <doctest.h>

#include <array>
#include <random>

#include "corpus.hpp"
#include "pga/extdata.hpp"
#include "pga/grouplab.hpp"

using namespace pga;

namespace {

Vec v(std::initializer_list<int> xs) {
  Vec out;
  for (int x : xs) out.push_back(static_cast<u8>(x));
  return out;
}

Vec e(int m, int r) {
  Vec out(m, 0);
  out[r] = 1;
  return out;
}

// Trivial action, m = 2, n = 1, phi_12 = a_1.
ExtDatum heis() { return datum_i3(); }

// h_1 acts by a Jordan block of size 3; phi_12 = a_1 is not fixed by h_1.
ExtDatum jordan_datum() {
  ExtDatum D = ExtDatum::trivial(3, 2, 3);
  D.gammas[0] = Mat::from_rows(3, {{1, 0, 0}, {1, 1, 0}, {0, 1, 1}});
  corpus::set_skew(D, 0, 1, v({1, 0, 0}));
  return D;
}

// The four-generator datum of the direct-factor reduction: h_1..h_3 act as in
// the I_{7.9} datum, h_4 trivially, phi_r4 = mu_r a_4.
ExtDatum reduction_datum(const std::array<int, 3>& mu) {
  ExtDatum B = datum_i79();
  ExtDatum D = ExtDatum::trivial(3, 4, 4);
  for (int r = 0; r < 3; ++r) D.gammas[r] = B.gammas[r];
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s) D.set_phi(r, s, B.phi(r, s));
  for (int r = 0; r < 3; ++r) corpus::set_skew(D, r, 3, v({0, 0, 0, mu[r]}));
  return D;
}

Mat derived_rows(const ExtDatum& D) {
  RealizedGroup G(D);
  auto c = derived_coordinates(G);
  REQUIRE(c.has_value());
  return *c;
}

}  // namespace

TEST_CASE("cocycle_eval examples") {
  ExtDatum D = heis();
  CHECK(cocycle_eval(D, v({1, 0}), v({0, 1})) == v({0}));
  CHECK(cocycle_eval(D, v({0, 1}), v({1, 0})) == v({2}));
  // Normalization.
  std::mt19937_64 rng(11);
  for (const auto& en : corpus::make_corpus(5, 2)) {
    Vec k(en.D.m);
    for (auto& x : k) x = static_cast<u8>(rng() % en.D.p);
    CHECK(cocycle_eval(en.D, Vec(en.D.m, 0), k) == Vec(en.D.n, 0));
    CHECK(cocycle_eval(en.D, k, Vec(en.D.m, 0)) == Vec(en.D.n, 0));
  }
}

TEST_CASE("recovery identity phi_rs = phi(h_r, h_s) - phi(h_s, h_r)") {
  std::mt19937_64 rng(3);
  for (const auto& en : corpus::make_corpus(17)) {
    const auto& D = en.D;
    for (int r = 0; r < D.m; ++r)
      for (int s = r + 1; s < D.m; ++s) {
        Vec a = cocycle_eval(D, e(D.m, r), e(D.m, s)), b = cocycle_eval(D, e(D.m, s), e(D.m, r));
        Vec d(D.n);
        for (int i = 0; i < D.n; ++i) d[i] = static_cast<u8>(modp(a[i] - b[i], D.p));
        CHECK(d == D.phi(r, s));
      }
  }
}

TEST_CASE("cocycle_validate examples") {
  // Trivial action, arbitrary skew Phi with zero diagonal.
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    ExtDatum D = ExtDatum::trivial(3, 3, 2);
    D = corpus::random_cochain(D, corpus::DiagZero, rng);
    CHECK(cocycle_validate(D).ok);
  }
  CHECK(cocycle_validate(datum_i79()).ok);
  auto rep = cocycle_validate(jordan_datum());
  CHECK_FALSE(rep.ok);
  REQUIRE(!rep.violations.empty());
  CHECK(rep.violations[0].rfind("(ii)", 0) == 0);
  CHECK_FALSE(cocycle_identity_exhaustive(jordan_datum()));
}

TEST_CASE("property: cocycle_validate agrees with the exhaustive 2-cocycle identity") {
  int pass = 0, fail = 0;
  for (const auto& en : corpus::make_corpus(101)) {
    std::uint64_t h = 1;
    for (int i = 0; i < en.D.m; ++i) h *= en.D.p;
    if (h > 27) continue;
    bool lin = cocycle_validate(en.D).ok;
    CHECK(lin == cocycle_identity_exhaustive(en.D));
    if (en.isCocycle) CHECK(lin);
    (lin ? pass : fail)++;
  }
  CHECK(pass > 20);
  CHECK(fail > 5);
}

TEST_CASE("cocycle_identity_exhaustive respects its budget") {
  ExtDatum D = ExtDatum::trivial(3, 3, 1);
  CHECK_THROWS_AS(cocycle_identity_exhaustive(D, 1000), Error);
}

TEST_CASE("coboundary_test") {
  ExtDatum Z = ExtDatum::trivial(3, 2, 2);
  auto w = coboundary_test(Z);
  REQUIRE(w.has_value());
  for (const auto& a : *w) CHECK(a == Vec(2, 0));
  // Trivial action: only Phi = 0 is a coboundary.
  CHECK_FALSE(coboundary_test(heis()).has_value());
  CHECK_FALSE(coboundary_test(datum_i79()).has_value());
  // Constructed coboundaries are recognised and give a split extension.
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    int kind = 1 + t % 2, m = 1 + t % 3, n = 2 + t % 3;
    ExtDatum D = ExtDatum::trivial(3, m, n);
    D.gammas = corpus::random_module(3, m, n, kind, rng);
    std::vector<Vec> a(m, Vec(n));
    for (auto& x : a)
      for (auto& c : x) c = static_cast<u8>(rng() % 3);
    for (int r = 0; r < m; ++r) {
      Mat N(3, n, n), P = Mat::identity(3, n);
      for (int k = 0; k < 3; ++k) {
        N = N + P;
        P = P * D.gammas[r];
      }
      D.set_phi(r, r, N.apply(a[r]));
      for (int s = r + 1; s < m; ++s) {
        Vec x = (D.gammas[r] - Mat::identity(3, n)).apply(a[s]);
        Vec y = (D.gammas[s] - Mat::identity(3, n)).apply(a[r]);
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = static_cast<u8>(modp(x[i] - y[i], 3));
        corpus::set_skew(D, r, s, d);
      }
    }
    REQUIRE(cocycle_validate(D).ok);
    auto wit = coboundary_test(D);
    REQUIRE(wit.has_value());
    if (m + n <= 6) {
      ExtDatum S = D;
      S.phis.assign(n, Mat(3, m, m));
      CHECK(group_fingerprint(RealizedGroup(D)) == group_fingerprint(RealizedGroup(S)));
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("exponent_p_test examples") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 5; ++t) {
    ExtDatum D = corpus::random_cochain(ExtDatum::trivial(3, 3, 2), corpus::DiagZero, rng);
    CHECK(exponent_p_test(D).ok);
  }
  ExtDatum F = ExtDatum::trivial(3, 2, 1);
  F.set_phi(0, 0, v({1}));
  CHECK(cocycle_validate(F).ok);
  CHECK_FALSE(exponent_p_test(F).ok);
  RealizedGroup GF(F);
  CHECK(GF.element_order(GF.encode({v({0}), v({1, 0})})) == 9);
  CHECK(exponent_p_test(datum_i79()).ok);
  CHECK(group_exponent(RealizedGroup(datum_i79())) == 3);
}

TEST_CASE("property: exponent_p_test agrees with the brute-force exponent") {
  int yes = 0, no = 0;
  for (const auto& en : corpus::make_corpus(202)) {
    const auto& D = en.D;
    if (!cocycle_validate(D).ok) continue;
    bool verdict = exponent_p_test(D).ok;
    CHECK(verdict == (group_exponent(RealizedGroup(D)) == static_cast<std::uint64_t>(D.p)));
    CHECK(verdict == exponent_p_test_general(D).ok);
    if (D.p == 3) CHECK(exponent_p_test_p3(D).ok == exponent_p_test_general(D).ok);
    (verdict ? yes : no)++;
  }
  CHECK(yes > 10);
  CHECK(no > 10);
}

TEST_CASE("derived_submodule examples") {
  CHECK(derived_submodule(datum_i3()).rows == 1);
  CHECK(derived_submodule(ExtDatum::trivial(3, 3, 2)).rows == 0);
  CHECK(derived_submodule(datum_i79()).rows == 4);
}

TEST_CASE("property: derived_submodule equals the brute-force derived subgroup") {
  int n = 0;
  for (const auto& en : corpus::make_corpus(303)) {
    if (!cocycle_validate(en.D).ok) continue;
    CHECK(derived_submodule(en.D) == derived_rows(en.D));
    ++n;
  }
  CHECK(n > 30);
}

TEST_CASE("loewy_length") {
  CHECK(loewy_length(ExtDatum::trivial(3, 2, 3)) == 1);
  CHECK(loewy_length(ExtDatum::trivial(3, 2, 0)) == 0);
  CHECK(loewy_length(datum_i79()) == 2);
  CHECK(socle(datum_i79()).rows == 1);
  for (const auto& en : corpus::make_corpus(404)) {
    if (!cocycle_validate(en.D).ok || !exponent_p_test(en.D).ok) continue;
    CHECK(loewy_length(en.D) <= en.D.p - 1);
  }
}

TEST_CASE("change_basis examples") {
  ExtDatum D = datum_i79();
  CHECK(change_basis(D, Mat::identity(3, 3), Mat::identity(3, 4)) == D);
  // Swapping h_1, h_2 and negating a_1 leaves the I_3 datum unchanged.
  ExtDatum I3 = datum_i3();
  Mat swap = Mat::from_rows(3, {{0, 1}, {1, 0}});
  Mat neg = Mat::from_rows(3, {{2}});
  CHECK(change_basis(I3, swap, neg) == I3);
  CHECK(change_basis_oracle(I3, swap, neg) == I3);
  CHECK_THROWS_AS(change_basis(I3, Mat::from_rows(3, {{1, 1}, {1, 1}}), neg), Error);
  CHECK_THROWS_AS(change_basis(I3, swap, Mat::from_rows(3, {{0}})), Error);
}

TEST_CASE("change_basis with trivial action is congruence of the Phi's") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    int m = 2 + t % 4, n = 1 + t % 3;
    ExtDatum D = corpus::random_cochain(ExtDatum::trivial(3, m, n), corpus::DiagZero, rng);
    Mat CH = random_invertible(3, m, rng), CA = random_invertible(3, n, rng);
    Mat Ainv = invert(CA);
    // Transition h'_r = prod_u h_u^{beta_ur}: Phi'^{(i)} = sum_l ahat_il C_H^T Phi^{(l)} C_H.
    ExtDatum E = change_basis(D, CH, CA);
    // With the transposed transition matrix this is the form C_H Phi C_H^T.
    ExtDatum E2 = change_basis(D, CH.transpose(), CA);
    for (int i = 0; i < n; ++i) {
      Mat S(3, m, m), S2(3, m, m);
      for (int l = 0; l < n; ++l) {
        S = S + (CH.transpose() * D.phis[l] * CH).scaled(Ainv.at(i, l));
        S2 = S2 + (CH * D.phis[l] * CH.transpose()).scaled(Ainv.at(i, l));
      }
      CHECK(E.phis[i] == S);
      CHECK(E2.phis[i] == S2);
    }
  }
}

TEST_CASE("property: change_basis matches the transport oracle and preserves the group") {
  std::mt19937_64 rng(41);
  int n = 0;
  for (const auto& en : corpus::make_corpus(505)) {
    const auto& D = en.D;
    if (!cocycle_validate(D).ok || !exponent_p_test(D).ok) continue;
    Mat CH = random_invertible(D.p, D.m, rng), CA = random_invertible(D.p, D.n, rng);
    ExtDatum E = change_basis(D, CH, CA);
    CHECK(E == change_basis_oracle(D, CH, CA));
    CHECK(cocycle_validate(E).ok);
    CHECK(exponent_p_test(E).ok);
    CHECK(group_fingerprint(RealizedGroup(E)) == group_fingerprint(RealizedGroup(D)));
    ++n;
  }
  CHECK(n > 20);
}

TEST_CASE("twist_equivalence_test") {
  ExtDatum D = datum_i79();
  auto X0 = twist_equivalence_test(D, D);
  REQUIRE(X0.has_value());
  CHECK(X0->is_zero());
  // Trivial action: distinct Phi's are never twist equivalent.
  std::mt19937_64 rng(51);
  for (int t = 0; t < 10; ++t) {
    ExtDatum A = corpus::random_cochain(ExtDatum::trivial(3, 3, 2), corpus::DiagZero, rng);
    ExtDatum B = corpus::random_cochain(ExtDatum::trivial(3, 3, 2), corpus::DiagZero, rng);
    CHECK(twist_equivalence_test(A, B).has_value() == (A == B));
  }
  // Direct-factor reduction: phi_r4 = mu_r a_4 twists away with x_4 = sum mu_r a_r.
  std::array<int, 3> mu{1, 2, 1};
  ExtDatum T = reduction_datum(mu), U = reduction_datum({0, 0, 0});
  auto X = twist_equivalence_test(T, U);
  REQUIRE(X.has_value());
  Mat Gamma(3, 16, 4);
  for (int r = 0; r < 4; ++r) Gamma.set_block(r * 4, 0, T.gammas[r] - Mat::identity(3, 4));
  Mat GX = Gamma * *X;
  CHECK(GX - block_transpose(GX, 4, 1) == stack_phis(T) - stack_phis(U));
  // The explicit witness also solves the equation.
  Mat W(3, 4, 4);
  for (int r = 0; r < 3; ++r) W.at(r, 3) = static_cast<u8>(mu[r]);
  Mat GW = Gamma * W;
  CHECK(GW - block_transpose(GW, 4, 1) == stack_phis(T) - stack_phis(U));
  CHECK(group_fingerprint(RealizedGroup(T)) == group_fingerprint(RealizedGroup(U)));
  CHECK_THROWS_AS(twist_equivalence_test(D, datum_i3()), Error);
}

TEST_CASE("property: twisting by coboundaries is detected") {
  std::mt19937_64 rng(61);
  int n = 0;
  for (const auto& en : corpus::make_corpus(606)) {
    const auto& D = en.D;
    if (!cocycle_validate(D).ok || D.m == 0 || D.n == 0) continue;
    Mat X = random_mat(D.p, D.n, D.m, rng);
    Mat Gamma(D.p, D.m * D.n, D.n);
    for (int r = 0; r < D.m; ++r) Gamma.set_block(r * D.n, 0, D.gammas[r] - Mat::identity(D.p, D.n));
    Mat GX = Gamma * X;
    ExtDatum E = D;
    E.phis = unstack_phis(stack_phis(D) - (GX - block_transpose(GX, D.n, 1)), D.m, D.n);
    auto W = twist_equivalence_test(D, E);
    REQUIRE(W.has_value());
    Mat GW = Gamma * *W;
    CHECK(GW - block_transpose(GW, D.n, 1) == stack_phis(D) - stack_phis(E));
    ++n;
  }
  CHECK(n > 30);
}

TEST_CASE("stack_phis layout") {
  ExtDatum D = datum_i79();
  Mat S = stack_phis(D);
  CHECK(S.rows == 12);
  CHECK(S.cols == 3);
  // phi_12 = a_3: row (1-1)*4 + 3, column 2.
  CHECK(S.at(2, 1) == 1);
  CHECK(unstack_phis(S, 3, 4) == D.phis);
}

TEST_CASE("product_datum") {
  ExtDatum I3 = datum_i3();
  ExtDatum Zp = ExtDatum::trivial(3, 0, 1);
  RealizedGroup G1(I3), G2(Zp), G12(product_datum(I3, Zp));
  CHECK(group_fingerprint(G12) == fingerprint_product(group_fingerprint(G1), group_fingerprint(G2)));
  CHECK(center(G12).size() == 9);
  ExtDatum ab = product_datum(ExtDatum::trivial(3, 1, 1), ExtDatum::trivial(3, 2, 0));
  CHECK(ab.trivial_action());
  CHECK(derived_subgroup(RealizedGroup(ab)).size() == 1);
  RealizedGroup G2x(product_datum(I3, I3));
  CHECK(G2x.order() == 729);
  CHECK(derived_subgroup(G2x).size() == 9);
  // Product fingerprints compose for nontrivial actions too.
  ExtDatum J = ExtDatum::trivial(3, 1, 2);
  J.gammas[0] = Mat::from_rows(3, {{1, 0}, {1, 1}});
  CHECK(group_fingerprint(RealizedGroup(product_datum(J, I3))) ==
        fingerprint_product(group_fingerprint(RealizedGroup(J)), group_fingerprint(G1)));
}

TEST_CASE("datum and subspace correspondence") {
  SkewSubspace W21 = canonical_basis(3, 2, {skew_normal_form(3, 2, 1)});
  CHECK(datum_from_subspace(W21) == datum_i3());
  ExtDatum Z = datum_from_subspace(zero_subspace(3, 3));
  CHECK(Z.n == 0);
  CHECK(derived_subgroup(RealizedGroup(Z)).size() == 1);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto V = random_subspace(3, 4, 1 + seed % 3, seed);
    CHECK(subspace_from_datum(datum_from_subspace(V)) == V);
  }
  CHECK_THROWS_AS(subspace_from_datum(datum_i79()), Error);
}

TEST_CASE("datum JSON round trip and validation") {
  for (const auto& D : {datum_i3(), datum_i79(), jordan_datum()}) CHECK(datum_from_json(datum_to_json(D)) == D);
  auto j = datum_to_json(datum_i79());
  j["gammas"][0]["entries"][0][0] = 2;  // Gamma^(1) no longer unipotent of order 3
  CHECK_THROWS_AS(datum_from_json(j), Error);
  ExtDatum bad = datum_i3();
  bad.phis[0].at(1, 0) = 1;
  CHECK_THROWS_AS(validate_datum(bad), Error);
}
