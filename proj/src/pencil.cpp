#include "pga/pencil.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace pga {

namespace {

// Univariate polynomials over Z_p, coefficients low-to-high, trimmed (the
// zero polynomial is the empty vector).
using UPoly = std::vector<int>;

void trim(UPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int udeg(const UPoly& a) { return static_cast<int>(a.size()) - 1; }

UPoly umonic(UPoly a, int p) {
  if (a.empty()) return a;
  int li = inv_mod(a.back(), p);
  for (auto& x : a) x = x * li % p;
  return a;
}

// a = q b + r
void udivmod(UPoly a, const UPoly& b, int p, UPoly& q, UPoly& r) {
  trim(a);
  q.assign(std::max(0, udeg(a) - udeg(b) + 1), 0);
  int li = inv_mod(b.back(), p);
  for (int k = udeg(a) - udeg(b); k >= 0; --k) {
    int coef = a[k + udeg(b)] * li % p;
    q[k] = coef;
    if (coef == 0) continue;
    for (int j = 0; j <= udeg(b); ++j) a[k + j] = modp(a[k + j] - coef * b[j], p);
  }
  trim(a);
  trim(q);
  r = std::move(a);
}

UPoly ugcd(UPoly a, UPoly b, int p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    UPoly q, r;
    udivmod(a, b, p, q, r);
    a = std::move(b);
    b = std::move(r);
  }
  return umonic(a, p);
}

// All monic polynomials of the given degree, in a fixed order.
std::vector<UPoly> monic_polys(int p, int degree) {
  std::vector<UPoly> out;
  int total = 1;
  for (int i = 0; i < degree; ++i) total *= p;
  for (int code = 0; code < total; ++code) {
    UPoly a(degree + 1, 0);
    a[degree] = 1;
    int x = code;
    for (int i = 0; i < degree; ++i) {
      a[i] = x % p;
      x /= p;
    }
    out.push_back(std::move(a));
  }
  return out;
}

bool divides(const UPoly& h, const UPoly& g, int p) {
  UPoly q, r;
  udivmod(g, h, p, q, r);
  return r.empty();
}

// Trial division against every monic polynomial of degree <= deg/2.
bool uirreducible(const UPoly& g, int p) {
  int n = udeg(g);
  if (n < 1) return false;
  for (int d = 1; 2 * d <= n; ++d)
    for (const auto& h : monic_polys(p, d))
      if (divides(h, g, p)) return false;
  return true;
}

// f(t, 1) and the multiplicity of y in f (f nonzero).
UPoly dehomogenize(const HomPoly2& f, int& yPower) {
  int k = f.degree();
  yPower = 0;
  while (yPower <= k && f.c[yPower] == 0) ++yPower;
  UPoly g(k + 1, 0);
  for (int i = 0; i <= k; ++i) g[k - i] = f.c[i];
  trim(g);
  return g;
}

HomPoly2 homogenize(const UPoly& g, int degree, int p) {
  HomPoly2 f = HomPoly2::zero(p, degree);
  for (int i = 0; i <= degree; ++i) {
    int e = degree - i;
    if (e < static_cast<int>(g.size())) f.c[i] = g[e];
  }
  return f;
}

// Irreducible factorization of a nonzero homogeneous polynomial, ignoring
// the scalar: list of (normalized irreducible, exponent).
std::vector<std::pair<HomPoly2, int>> hom_factor(const HomPoly2& f) {
  int p = f.p;
  int yPower = 0;
  UPoly g = umonic(dehomogenize(f, yPower), p);
  std::vector<std::pair<HomPoly2, int>> out;
  if (yPower > 0) out.push_back({HomPoly2{p, {0, 1}}, yPower});
  for (int d = 1; udeg(g) >= 1; ++d) {
    if (2 * d > udeg(g)) {
      out.push_back({homogenize(g, udeg(g), p), 1});
      break;
    }
    for (const auto& h : monic_polys(p, d)) {
      int e = 0;
      while (udeg(g) >= d && divides(h, g, p)) {
        UPoly q, r;
        udivmod(g, h, p, q, r);
        g = std::move(q);
        ++e;
      }
      if (e > 0) out.push_back({homogenize(h, d, p), e});
    }
  }
  return out;
}

int signed_residue(int c, int p) { return c > p / 2 ? c - p : c; }

}  // namespace

bool HomPoly2::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](int v) { return v == 0; });
}

HomPoly2 HomPoly2::zero(int p, int degree) { return HomPoly2{p, std::vector<int>(degree + 1, 0)}; }

HomPoly2 HomPoly2::normalized() const {
  HomPoly2 out = *this;
  for (int v : c) {
    if (v == 0) continue;
    int s = inv_mod(v, p);
    for (auto& x : out.c) x = x * s % p;
    break;
  }
  return out;
}

std::string HomPoly2::to_string() const {
  if (is_zero()) return "0";
  int k = degree();
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i <= k; ++i) {
    int v = signed_residue(c[i], p);
    if (v == 0) continue;
    int ex = k - i, ey = i;
    if (v < 0)
      os << "-";
    else if (!first)
      os << "+";
    int a = std::abs(v);
    bool monomial = ex + ey > 0;
    if (a != 1 || !monomial) os << a;
    if (ex > 0) os << "x" << (ex > 1 ? "^" + std::to_string(ex) : "");
    if (ey > 0) os << "y" << (ey > 1 ? "^" + std::to_string(ey) : "");
    first = false;
  }
  return os.str();
}

HomPoly2 hom_mul(const HomPoly2& a, const HomPoly2& b) {
  HomPoly2 out = HomPoly2::zero(a.p, a.degree() + b.degree());
  for (int i = 0; i <= a.degree(); ++i) {
    if (a.c[i] == 0) continue;
    for (int j = 0; j <= b.degree(); ++j) out.c[i + j] = (out.c[i + j] + a.c[i] * b.c[j]) % a.p;
  }
  return out;
}

HomPoly2 hom_pow(const HomPoly2& a, int e) {
  HomPoly2 out = HomPoly2::one(a.p);
  for (int i = 0; i < e; ++i) out = hom_mul(out, a);
  return out;
}

HomPoly2 hom_gcd(const HomPoly2& a, const HomPoly2& b) {
  if (a.is_zero()) return b.normalized();
  if (b.is_zero()) return a.normalized();
  int ya = 0, yb = 0;
  UPoly ga = dehomogenize(a, ya), gb = dehomogenize(b, yb);
  UPoly g = ugcd(ga, gb, a.p);
  return homogenize(g, std::min(ya, yb) + udeg(g), a.p).normalized();
}

HomPoly2 hom_div(const HomPoly2& a, const HomPoly2& b) {
  if (b.is_zero()) throw Error(ErrorCode::InvalidInput, "hom_div: division by zero");
  int k = a.degree() - b.degree();
  if (k < 0) throw Error(ErrorCode::InvalidInput, "hom_div: divisor has larger degree");
  if (a.is_zero()) return HomPoly2::zero(a.p, k);
  int ya = 0, yb = 0;
  UPoly ga = dehomogenize(a, ya), gb = dehomogenize(b, yb);
  UPoly q, r;
  udivmod(ga, gb, a.p, q, r);
  if (!r.empty() || ya < yb) throw Error(ErrorCode::InvalidInput, "hom_div: inexact division");
  return homogenize(q, k, a.p);
}

HomPoly2 gl2_act(const Mat& P, const HomPoly2& f) {
  int p = f.p, k = f.degree();
  HomPoly2 u{p, {P.at(0, 0), P.at(0, 1)}};  // ax + by
  HomPoly2 v{p, {P.at(1, 0), P.at(1, 1)}};  // cx + dy
  HomPoly2 out = HomPoly2::zero(p, k);
  for (int i = 0; i <= k; ++i) {
    if (f.c[i] == 0) continue;
    HomPoly2 term = hom_mul(hom_pow(u, k - i), hom_pow(v, i));
    for (int j = 0; j <= k; ++j) out.c[j] = (out.c[j] + f.c[i] * term.c[j]) % p;
  }
  return out;
}

bool hom_irreducible(const HomPoly2& f) {
  if (f.is_zero() || f.degree() < 1) return false;
  if (f.degree() == 1) return true;
  if (f.c[0] == 0) return false;  // divisible by y
  int yPower = 0;
  return uirreducible(dehomogenize(f, yPower), f.p);
}

std::vector<HomPoly2> irreducible_homogeneous(int p, int degree, bool allScalars) {
  if (degree < 1) throw Error(ErrorCode::InvalidInput, "irreducible_homogeneous: degree must be >= 1");
  std::vector<HomPoly2> classes;
  if (degree == 1) classes.push_back(HomPoly2{p, {0, 1}});
  for (const auto& g : monic_polys(p, degree))
    if (uirreducible(g, p)) classes.push_back(homogenize(g, degree, p));
  std::sort(classes.begin(), classes.end());
  if (!allScalars) return classes;
  std::vector<HomPoly2> out;
  for (const auto& f : classes)
    for (int s = 1; s < p; ++s) {
      HomPoly2 g = f;
      for (auto& x : g.c) x = x * s % p;
      out.push_back(g);
    }
  return out;
}

int PencilType::support() const {
  int s = r();
  for (int k : minimalIndices) s += 2 * k;
  for (const auto& e : divisors) s += 2 * e.f.degree() * e.power;
  return s;
}

void PencilType::sort() {
  std::sort(minimalIndices.begin(), minimalIndices.end(), std::greater<int>());
  std::sort(divisors.begin(), divisors.end());
}

std::string PencilType::to_string() const {
  std::ostringstream os;
  os << "(" << m << "; ";
  if (minimalIndices.empty()) os << "-";
  for (size_t i = 0; i < minimalIndices.size(); ++i) os << (i ? "," : "") << minimalIndices[i];
  os << "; ";
  if (divisors.empty()) os << "-";
  for (size_t i = 0; i < divisors.size(); ++i) {
    os << (i ? ", " : "") << "(" << divisors[i].f.to_string() << ")";
    if (divisors[i].power != 1) os << "^" << divisors[i].power;
  }
  os << ")";
  return os.str();
}

namespace {

void check_pair(const SkewForm& A, const SkewForm& B) {
  validate_skew(A);
  validate_skew(B);
  if (A.rows != B.rows || A.p != B.p) throw Error(ErrorCode::InvalidInput, "pencil: A and B differ in shape or p");
}

}  // namespace

std::vector<HomPoly2> determinantal_divisors(const SkewForm& A, const SkewForm& B) {
  check_pair(A, B);
  const int p = A.p, m = A.rows;
  if (m > 12) throw Error(ErrorCode::InvalidInput, "determinantal_divisors: m too large");
  // Minor on (row set, column set) by Laplace expansion along the lowest row,
  // memoized over both masks.
  std::vector<std::map<std::uint32_t, HomPoly2>> memo(std::size_t(1) << m);
  std::function<const HomPoly2&(std::uint32_t, std::uint32_t)> minor = [&](std::uint32_t rm,
                                                                          std::uint32_t cm) -> const HomPoly2& {
    auto& slot = memo[rm];
    if (auto it = slot.find(cm); it != slot.end()) return it->second;
    int k = std::popcount(rm);
    HomPoly2 acc = HomPoly2::zero(p, k);
    if (k == 0) {
      acc = HomPoly2::one(p);
    } else {
      int r0 = std::countr_zero(rm);
      int pos = 0;
      for (int j = 0; j < m; ++j) {
        if (!(cm >> j & 1)) continue;
        int a = A.at(r0, j), b = B.at(r0, j);
        if (a || b) {
          const HomPoly2& sub = minor(rm & ~(1u << r0), cm & ~(1u << j));
          HomPoly2 term = hom_mul(HomPoly2{p, {a, b}}, sub);
          int sgn = pos % 2 ? p - 1 : 1;
          for (int t = 0; t <= k; ++t) acc.c[t] = (acc.c[t] + sgn * term.c[t]) % p;
        }
        ++pos;
      }
    }
    return slot.emplace(cm, std::move(acc)).first->second;
  };
  std::vector<HomPoly2> D;
  const std::uint32_t full = (1u << m) - 1;
  for (int k = 1; k <= m; ++k) {
    HomPoly2 g = HomPoly2::zero(p, k);
    for (std::uint32_t rm = 0; rm <= full; ++rm) {
      if (std::popcount(rm) != k) continue;
      for (std::uint32_t cm = 0; cm <= full; ++cm) {
        if (std::popcount(cm) != k) continue;
        const HomPoly2& x = minor(rm, cm);
        if (!x.is_zero()) g = hom_gcd(g, x);
        if (!g.is_zero() && g.degree() == 0) break;
      }
      if (!g.is_zero() && g.degree() == 0) break;
    }
    D.push_back(g);
  }
  return D;
}

int generic_rank(const SkewForm& A, const SkewForm& B) {
  auto D = determinantal_divisors(A, B);
  int R = 0;
  for (size_t k = 0; k < D.size(); ++k)
    if (!D[k].is_zero()) R = static_cast<int>(k) + 1;
  return R;
}

namespace {

// All column minimal indices (including zeros), ascending, from the kernel
// dimensions n_j of the block Toeplitz maps v_0..v_j -> coefficients of
// (tA + B) sum v_i t^i.
std::vector<int> all_minimal_indices(const SkewForm& A, const SkewForm& B, int genericRank) {
  const int p = A.p, m = A.rows;
  const int total = m - genericRank;
  std::vector<int> out;
  int prevS = 0;  // #{eps <= j-1}
  int prevN = 0;  // n_{j-1}
  for (int j = 0; static_cast<int>(out.size()) < total; ++j) {
    if (j > m) throw Error(ErrorCode::InvalidInput, "minimal_indices: did not terminate");
    Mat T(p, (j + 2) * m, (j + 1) * m);
    for (int i = 0; i <= j; ++i) {
      T.set_block(i * m, i * m, B);
      T.set_block((i + 1) * m, i * m, A);
    }
    int n = (j + 1) * m - rank(T);
    int s = n - prevN;
    for (int c = 0; c < s - prevS; ++c) out.push_back(j);
    prevS = s;
    prevN = n;
  }
  return out;
}

// Halves the multiset of elementary divisors of a skew pencil (each occurs
// an even number of times).
std::vector<ElementaryDivisor> skew_divisors(const std::vector<HomPoly2>& D, int R) {
  std::map<std::pair<HomPoly2, int>, int> counts;
  HomPoly2 prev = HomPoly2::one(D.empty() ? 3 : D[0].p);
  for (int k = 1; k <= R; ++k) {
    HomPoly2 E = hom_div(D[k - 1], prev);
    for (auto& [f, e] : hom_factor(E)) counts[{f, e}]++;
    prev = D[k - 1];
  }
  std::vector<ElementaryDivisor> out;
  for (auto& [key, n] : counts) {
    if (n % 2) throw Error(ErrorCode::InvalidInput, "pencil_type: unpaired elementary divisor");
    for (int i = 0; i < n / 2; ++i) out.push_back({key.first, key.second});
  }
  return out;
}

}  // namespace

std::vector<int> minimal_indices(const SkewForm& A, const SkewForm& B) {
  auto all = all_minimal_indices(A, B, generic_rank(A, B));
  std::vector<int> out;
  for (int k : all)
    if (k >= 1) out.push_back(k);
  std::sort(out.begin(), out.end(), std::greater<int>());
  return out;
}

PencilType pencil_type(const SkewForm& A, const SkewForm& B) {
  check_pair(A, B);
  Mat span = stack_rows({skew_to_vec(A), skew_to_vec(B)}, A.p, skew_dim(A.rows));
  if (rank(span) < 2) throw Error(ErrorCode::DependentPair, "pencil_type: A and B span less than 2 dimensions");
  auto D = determinantal_divisors(A, B);
  int R = 0;
  for (size_t k = 0; k < D.size(); ++k)
    if (!D[k].is_zero()) R = static_cast<int>(k) + 1;
  PencilType t;
  t.p = A.p;
  t.m = A.rows;
  for (int k : all_minimal_indices(A, B, R))
    if (k >= 1) t.minimalIndices.push_back(k);
  t.divisors = skew_divisors(D, R);
  t.sort();
  return t;
}

CanonicalPair canonical_pair(const PencilType& t) {
  const int p = t.p;
  for (int k : t.minimalIndices)
    if (k < 1) throw Error(ErrorCode::InvalidInput, "canonical_pair: minimal indices must be >= 1");
  for (const auto& e : t.divisors)
    if (e.power < 1 || !hom_irreducible(e.f))
      throw Error(ErrorCode::InvalidInput, "canonical_pair: elementary divisor " + e.f.to_string() + " is not irreducible");
  if (t.support() > t.m)
    throw Error(ErrorCode::TypeTooLarge, "canonical_pair: type " + t.to_string() + " needs " +
                                             std::to_string(t.support()) + " > m rows");
  int rowsC = 0, colsC = 0;
  for (int k : t.minimalIndices) {
    rowsC += k + 1;
    colsC += k;
  }
  for (const auto& e : t.divisors) {
    rowsC += e.f.degree() * e.power;
    colsC += e.f.degree() * e.power;
  }
  Mat C1(p, rowsC, colsC), C2(p, rowsC, colsC);
  int r0 = 0, c0 = 0;
  for (int k : t.minimalIndices) {
    for (int i = 0; i < k; ++i) {
      C1.at(r0 + i, c0 + i) = 1;      // L_k = [I_k; 0]
      C2.at(r0 + i + 1, c0 + i) = 1;  // R_k = [0; I_k]
    }
    r0 += k + 1;
    c0 += k;
  }
  for (const auto& e : t.divisors) {
    HomPoly2 F = hom_pow(e.f, e.power);
    int n = F.degree();
    bool yPower = e.f.c[0] == 0;  // f = y
    if (yPower) {
      for (int i = 0; i + 1 < n; ++i) C1.at(r0 + i + 1, c0 + i) = 1;  // N_n
      for (int i = 0; i < n; ++i) C2.at(r0 + i, c0 + i) = 1;          // I_n
    } else {
      // Companion matrix of h(t) = F(t, -1) / lead: superdiagonal ones, last
      // row -h_0 .. -h_{n-1}; then det(xI + yC) = F(x, y) / lead.
      std::vector<int> h(n + 1, 0);
      for (int i = 0; i <= n; ++i) h[n - i] = i % 2 ? modp(-F.c[i], p) : F.c[i];
      int li = inv_mod(h[n], p);
      for (auto& v : h) v = v * li % p;
      for (int i = 0; i < n; ++i) C1.at(r0 + i, c0 + i) = 1;
      for (int i = 0; i + 1 < n; ++i) C2.at(r0 + i, c0 + i + 1) = 1;
      for (int j = 0; j < n; ++j) C2.at(r0 + n - 1, c0 + j) = modp(-h[j], p);
    }
    r0 += n;
    c0 += n;
  }
  auto embed = [&](const Mat& C) {
    Mat X(p, t.m, t.m);
    X.set_block(0, rowsC, C);
    X.set_block(rowsC, 0, -C.transpose());
    return X;
  };
  return {embed(C1), embed(C2)};
}

std::vector<Mat> gl2_elements(int p) {
  std::vector<Mat> out;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        for (int d = 0; d < p; ++d)
          if (modp(a * d - b * c, p) != 0) out.push_back(Mat::from_rows(p, {{a, b}, {c, d}}));
  return out;
}

PencilType gl2_act(const Mat& P, const PencilType& t) {
  PencilType out = t;
  for (auto& e : out.divisors) e.f = gl2_act(P, e.f).normalized();
  out.sort();
  return out;
}

PencilType type_canonical_under_gl2(const PencilType& t) {
  PencilType best = t;
  best.sort();
  for (const auto& P : gl2_elements(t.p)) {
    PencilType img = gl2_act(P, t);
    if (img < best) best = img;
  }
  return best;
}

std::vector<Dim2Class> classify_dim2(int p, int m) {
  if (m < 2) throw Error(ErrorCode::InvalidInput, "classify_dim2: m must be >= 2");
  // Candidate elementary divisors (f, d) with 2 deg(f) d <= m.
  std::vector<ElementaryDivisor> cands;
  for (int deg = 1; 2 * deg <= m; ++deg)
    for (const auto& f : irreducible_homogeneous(p, deg))
      for (int d = 1; 2 * deg * d <= m; ++d) cands.push_back({f, d});
  std::set<PencilType> classes;

  std::vector<int> ks;
  std::vector<ElementaryDivisor> divs;
  auto emit = [&]() {
    PencilType t;
    t.p = p;
    t.m = m;
    t.minimalIndices = ks;
    t.divisors = divs;
    t.sort();
    if (t.support() == 0) return;
    CanonicalPair cp = canonical_pair(t);
    Mat span = stack_rows({skew_to_vec(cp.A), skew_to_vec(cp.B)}, p, skew_dim(m));
    if (rank(span) < 2) return;
    classes.insert(type_canonical_under_gl2(t));
  };
  std::function<void(size_t, int)> chooseDivs = [&](size_t from, int budget) {
    emit();
    for (size_t i = from; i < cands.size(); ++i) {
      int w = 2 * cands[i].f.degree() * cands[i].power;
      if (w > budget) continue;
      divs.push_back(cands[i]);
      chooseDivs(i, budget - w);
      divs.pop_back();
    }
  };
  std::function<void(int, int)> chooseKs = [&](int maxK, int budget) {
    chooseDivs(0, budget);
    for (int k = std::min(maxK, (budget - 1) / 2); k >= 1; --k) {
      ks.push_back(k);
      chooseKs(k, budget - (2 * k + 1));
      ks.pop_back();
    }
  };
  chooseKs(m, m);

  std::vector<Dim2Class> out;
  for (const auto& t : classes) out.push_back({t, canonical_pair(t)});
  return out;
}

nlohmann::json pencil_type_to_json(const PencilType& t) {
  nlohmann::json divs = nlohmann::json::array();
  for (const auto& e : t.divisors) divs.push_back({{"poly", e.f.c}, {"power", e.power}});
  return {{"p", t.p}, {"m", t.m}, {"minimal_indices", t.minimalIndices}, {"elementary_divisors", divs}};
}

PencilType pencil_type_from_json(const nlohmann::json& j) {
  try {
    PencilType t;
    t.p = j.value("p", 3);
    t.m = j.at("m").get<int>();
    t.minimalIndices = j.at("minimal_indices").get<std::vector<int>>();
    for (const auto& e : j.at("elementary_divisors")) {
      HomPoly2 f{t.p, e.at("poly").get<std::vector<int>>()};
      for (auto& x : f.c) x = modp(x, t.p);
      t.divisors.push_back({f.normalized(), e.at("power").get<int>()});
    }
    t.sort();
    return t;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, std::string("pencil type JSON: ") + ex.what());
  }
}

}  // namespace pga
