#pragma once

// Pairs of anti-symmetric matrices (pencils xA + yB) over Z_p: homogeneous
// bivariate polynomials, determinantal divisors, minimal indices, canonical
// pairs of a given type and normalization of types under GL_2(Z_p).

#include <string>
#include <vector>

#include <json.hpp>

#include "pga/skewform.hpp"

namespace pga {

// Homogeneous f(x, y) of degree c.size()-1 with coefficients of
// x^k, x^{k-1} y, ..., y^k.
struct HomPoly2 {
  int p = 3;
  std::vector<int> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const;
  // Scalar class representative: first nonzero coefficient equal to 1.
  HomPoly2 normalized() const;
  std::string to_string() const;
  auto operator<=>(const HomPoly2& o) const {
    if (auto cmp = degree() <=> o.degree(); cmp != 0) return cmp;
    return c <=> o.c;
  }
  bool operator==(const HomPoly2& o) const { return c == o.c; }

  static HomPoly2 zero(int p, int degree);
  static HomPoly2 one(int p) { return HomPoly2{p, {1}}; }
};

HomPoly2 hom_mul(const HomPoly2& a, const HomPoly2& b);
HomPoly2 hom_pow(const HomPoly2& a, int e);
// gcd, normalized; gcd(0, f) = f normalized.
HomPoly2 hom_gcd(const HomPoly2& a, const HomPoly2& b);
// Exact division a / b (b must divide a).
HomPoly2 hom_div(const HomPoly2& a, const HomPoly2& b);
// (P . f)(x, y) = f(ax + by, cx + dy) for P = [[a, b], [c, d]].
HomPoly2 gl2_act(const Mat& P, const HomPoly2& f);
bool hom_irreducible(const HomPoly2& f);

// Irreducible homogeneous polynomials of the given degree, one per scalar
// class, or all nonzero scalar multiples when `allScalars` is set.
std::vector<HomPoly2> irreducible_homogeneous(int p, int degree, bool allScalars = false);

struct ElementaryDivisor {
  HomPoly2 f;  // irreducible, normalized
  int power = 1;
  auto operator<=>(const ElementaryDivisor& o) const {
    if (auto cmp = f.degree() <=> o.f.degree(); cmp != 0) return cmp;
    if (auto cmp = power <=> o.power; cmp != 0) return cmp;
    return f.c <=> o.f.c;
  }
  bool operator==(const ElementaryDivisor& o) const { return power == o.power && f == o.f; }
};

struct PencilType {
  int p = 3;
  int m = 0;
  std::vector<int> minimalIndices;             // k_1 >= ... >= k_r >= 1
  std::vector<ElementaryDivisor> divisors;     // sorted ascending

  int r() const { return static_cast<int>(minimalIndices.size()); }
  // 2 sum k_i + r + 2 sum deg(f_j) d_j
  int support() const;
  void sort();
  std::string to_string() const;
  // Total order: (r, minimal indices, divisors by (deg f, d, coefficients)).
  auto operator<=>(const PencilType& o) const {
    if (auto cmp = m <=> o.m; cmp != 0) return cmp;
    if (auto cmp = r() <=> o.r(); cmp != 0) return cmp;
    if (auto cmp = minimalIndices <=> o.minimalIndices; cmp != 0) return cmp;
    return divisors <=> o.divisors;
  }
  bool operator==(const PencilType& o) const {
    return m == o.m && minimalIndices == o.minimalIndices && divisors == o.divisors;
  }
};

struct CanonicalPair {
  SkewForm A, B;
};

// D_1..D_m of xA + yB; D_k is the normalized gcd of the k x k minors (zero
// polynomial of degree k when all of them vanish).
std::vector<HomPoly2> determinantal_divisors(const SkewForm& A, const SkewForm& B);
// Minimal indices k_i >= 1, descending.
std::vector<int> minimal_indices(const SkewForm& A, const SkewForm& B);
int generic_rank(const SkewForm& A, const SkewForm& B);
PencilType pencil_type(const SkewForm& A, const SkewForm& B);  // DependentPair
CanonicalPair canonical_pair(const PencilType& t);             // TypeTooLarge
PencilType type_canonical_under_gl2(const PencilType& t);
PencilType gl2_act(const Mat& P, const PencilType& t);
std::vector<Mat> gl2_elements(int p);

struct Dim2Class {
  PencilType type;
  CanonicalPair pair;
};
std::vector<Dim2Class> classify_dim2(int p, int m);

nlohmann::json pencil_type_to_json(const PencilType& t);
PencilType pencil_type_from_json(const nlohmann::json& j);

}  // namespace pga
