#include <doctest.h>

#include <random>
#include <set>

#include "pga/skewform.hpp"

using namespace pga;

namespace {

SkewForm random_skew(int p, int m, std::mt19937_64& rng) {
  Vec v(skew_dim(m));
  for (auto& x : v) x = static_cast<u8>(rng() % p);
  return skew_from_vec(p, m, v);
}

}  // namespace

TEST_CASE("pfaffian4 examples") {
  CHECK(pfaffian4(skew_normal_form(3, 4, 2)) == 1);
  CHECK(pfaffian4(SkewForm(3, 4, 4)) == 0);
  // Member of the family with x12 = c, x13 = a, x23 = b, x34 = c (the
  // "c^2" class) at a = b = 0, c = 1.
  SkewForm X = skew_from_upper(3, 4, {{1, 2, 1}, {3, 4, 1}});
  CHECK(pfaffian4(X) == 1);
  CHECK_THROWS_AS(pfaffian4(SkewForm(3, 5, 5)), Error);
}

TEST_CASE("principal_pfaffians examples") {
  CHECK(principal_pfaffians(SkewForm(3, 5, 5)) == std::vector<int>{0, 0, 0, 0, 0});
  SkewForm x35 = skew_from_upper(3, 5, {{3, 5, 1}});
  CHECK(principal_pfaffians(x35) == std::vector<int>{0, 0, 0, 0, 0});
  CHECK(skew_rank(x35) == 2);
  // x12=d, x14=a, x23=d, x24=b, x25=a, x35=b at a=b=d=1. Entries 1, 3, 4, 5
  // are -b^2, -a^2, bd, ad. Entry 2 only sees x13, x14, x15, x34, x35, x45,
  // which this space shares with the one lacking x23, so it is -ab here too.
  SkewForm V111 = skew_from_upper(3, 5, {{1, 2, 1}, {1, 4, 1}, {2, 3, 1}, {2, 4, 1}, {2, 5, 1}, {3, 5, 1}});
  CHECK(principal_pfaffians(V111) == std::vector<int>{2, 2, 2, 1, 1});
  SkewForm V121 = skew_from_upper(3, 5, {{1, 2, 1}, {1, 4, 1}, {2, 4, 1}, {2, 5, 1}, {3, 5, 1}});
  CHECK(principal_pfaffians(V121)[1] == principal_pfaffians(V111)[1]);
  CHECK_THROWS_AS(principal_pfaffians(SkewForm(3, 4, 4)), Error);
}

TEST_CASE("radical examples") {
  CHECK(radical(SkewForm(3, 4, 4)) == Mat::identity(3, 4));
  Mat r = radical(skew_normal_form(3, 5, 1));
  CHECK(r == Mat::from_rows(3, {{0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1}}));
}

TEST_CASE("skew_normalize examples") {
  SkewForm N = skew_normal_form(3, 5, 2);
  auto s = skew_normalize(N);
  CHECK(s.k == 2);
  CHECK(congruent(s.P, N) == N);

  auto t = skew_normalize(skew_from_upper(3, 3, {{1, 3, 1}}));
  CHECK(t.k == 1);

  // Every nonzero form in AS_4 has k in {1, 2}; both occur.
  std::set<int> ks;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    SkewForm X = random_skew(3, 4, rng);
    if (X.is_zero()) continue;
    ks.insert(skew_normalize(X).k);
  }
  CHECK(ks == std::set<int>{1, 2});
}

TEST_CASE("validator names the offending entry") {
  Mat X = Mat::from_rows(3, {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}});
  try {
    validate_skew(X);
    FAIL("expected InvalidInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidInput);
    CHECK(std::string(e.what()).find("(1,2)") != std::string::npos);
  }
}

TEST_CASE("perp examples") {
  std::mt19937_64 rng(5);
  SkewForm X = random_skew(3, 5, rng);
  CHECK(perp(Mat::identity(3, 5), {X}, 5) == radical(X));
  CHECK(perp(Mat::identity(3, 4), {SkewForm(3, 4, 4)}, 4) == Mat::identity(3, 4));
}

TEST_CASE("property: Pfaffian transforms by det") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 2000; ++t) {
    SkewForm X = random_skew(3, 4, rng);
    Mat C = random_mat(3, 4, 4, rng);
    CHECK(pfaffian4(congruent(C, X)) == det(C) * pfaffian4(X) % 3);
    CHECK(pfaffian4(X) * pfaffian4(X) % 3 == det(X));
  }
}

TEST_CASE("property: rank parity and skew_normalize round trip") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 10000; ++t) {
    int m = 2 + static_cast<int>(rng() % 5);
    SkewForm X = random_skew(3, m, rng);
    int r = skew_rank(X);
    CHECK(r % 2 == 0);
    auto s = skew_normalize(X);
    CHECK(2 * s.k == r);
    CHECK(congruent(s.P, X) == skew_normal_form(3, m, s.k));
    CHECK(rank(s.P) == m);
  }
}

TEST_CASE("property: radical and perp covariance under congruence") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 300; ++t) {
    int m = 3 + static_cast<int>(rng() % 4);
    SkewForm X = random_skew(3, m, rng);
    Mat P = random_invertible(3, m, rng);
    CHECK(row_space(radical(congruent(P, X)) * P) == radical(X));
    Vec u(m);
    for (auto& x : u) x = rng() % 3;
    // (uP)^{perp X} = (u^{perp P X P^T}) P
    Mat up = stack_rows({u}, 3, m) * P;
    Mat lhs = perp_vec(up.row_vec(0), {X});
    Mat rhs = perp_vec(u, {congruent(P, X)});
    CHECK(lhs == row_space(rhs * P));
  }
}

TEST_CASE("m = 5: rank 4 iff some principal Pfaffian is nonzero (exhaustive)") {
  // All 3^10 forms.
  int mismatches = 0;
  Vec v(10, 0);
  for (int code = 0; code < 59049; ++code) {
    int x = code;
    for (int j = 0; j < 10; ++j) {
      v[j] = x % 3;
      x /= 3;
    }
    SkewForm X = skew_from_vec(3, 5, v);
    auto pf = principal_pfaffians(X);
    bool nz = false;
    for (int q : pf) nz = nz || q != 0;
    int r = skew_rank(X);
    if ((r == 4) != nz) ++mismatches;
    if (!nz && r > 2) ++mismatches;
  }
  CHECK(mismatches == 0);
}
