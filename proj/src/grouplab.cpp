#include "pga/grouplab.hpp"

#include <algorithm>
#include <set>

namespace pga {

using Code = RealizedGroup::Code;

namespace {

std::uint32_t ipow(int p, int e) {
  std::uint32_t q = 1;
  for (int i = 0; i < e; ++i) q *= static_cast<std::uint32_t>(p);
  return q;
}

Vec digits(std::uint32_t c, int p, int len) {
  Vec v(len);
  for (int i = 0; i < len; ++i) {
    v[i] = static_cast<u8>(c % p);
    c /= p;
  }
  return v;
}

std::uint32_t undigits(const Vec& v, int p) {
  std::uint32_t c = 0;
  for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) c = c * p + v[i];
  return c;
}

std::uint32_t digit_add(std::uint32_t x, std::uint32_t y, int p, int len) {
  std::uint32_t out = 0, place = 1;
  for (int i = 0; i < len; ++i) {
    out += ((x % p + y % p) % p) * place;
    x /= p;
    y /= p;
    place *= p;
  }
  return out;
}

std::uint32_t digit_neg(std::uint32_t x, int p, int len) {
  std::uint32_t out = 0, place = 1;
  for (int i = 0; i < len; ++i) {
    out += ((p - x % p) % p) * place;
    x /= p;
    place *= p;
  }
  return out;
}

// Incrementally maintained subgroup <gens>.
struct Closure {
  const RealizedGroup* G;
  std::vector<char> mark;
  std::vector<Code> elems;
  std::vector<Code> gens;

  explicit Closure(const RealizedGroup& g) : G(&g), mark(g.order(), 0) {
    mark[G->identity()] = 1;
    elems.push_back(G->identity());
  }
  bool contains(Code x) const { return mark[x] != 0; }
  void add(Code x) {
    if (mark[x]) return;
    gens.push_back(x);
    // Right-multiplying by every generator; a finite set closed under this is
    // the generated subgroup.
    std::vector<Code> queue = elems;
    for (size_t i = 0; i < queue.size(); ++i)
      for (Code g : gens) {
        Code c = G->mul(queue[i], g);
        if (!mark[c]) {
          mark[c] = 1;
          elems.push_back(c);
          queue.push_back(c);
        }
      }
  }
  std::vector<Code> sorted() const {
    auto v = elems;
    std::sort(v.begin(), v.end());
    return v;
  }
};

Closure normal_closure_of(const RealizedGroup& G, const std::vector<Code>& X) {
  Closure C(G);
  for (Code x : X) C.add(x);
  auto Ggens = G.generators();
  for (size_t i = 0; i < C.gens.size(); ++i)
    for (Code g : Ggens) C.add(G.mul(G.mul(g, C.gens[i]), G.inv(g)));
  return C;
}

}  // namespace

// ---------------------------------------------------------------------------
// The realized group.

RealizedGroup::RealizedGroup(ExtDatum D, std::uint64_t budget) : D_(std::move(D)) {
  validate_datum(D_);
  const int p = D_.p, m = D_.m, n = D_.n;
  order_ = 1;
  for (int i = 0; i < m + n; ++i) {
    order_ *= p;
    if (order_ > budget) throw Error(ErrorCode::BudgetExceeded, "realized group: order exceeds budget");
  }
  qa_ = ipow(p, n);
  qh_ = ipow(p, m);
  act_.assign(order_, 0);
  for (std::uint32_t h = 0; h < qh_; ++h) {
    Mat G = D_.gamma_of(digits(h, p, m));
    for (std::uint32_t b = 0; b < qa_; ++b) act_[h * qa_ + b] = undigits(G.apply(digits(b, p, n)), p);
  }
  phi_.assign(n == 0 ? 0 : static_cast<size_t>(qh_) * qh_, 0);
  if (n > 0) {
    if (D_.trivial_action()) {
      // phi(h, k) = sum_r [(h_r + k_r) / p] phi_rr - sum_{r < s} k_r h_s phi_rs.
      // L[k][s] = sum_{r < s} k_r phi_rs, so the bilinear part is sum_s h_s L[k][s].
      std::vector<std::vector<int>> L(static_cast<size_t>(qh_) * m, std::vector<int>(n, 0));
      std::vector<Vec> phiv(m * m);
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) phiv[r * m + s] = D_.phi(r, s);
      std::vector<Vec> hd(qh_);
      for (std::uint32_t k = 0; k < qh_; ++k) {
        hd[k] = digits(k, p, m);
        for (int s = 0; s < m; ++s)
          for (int r = 0; r < s; ++r)
            for (int i = 0; i < n; ++i) L[k * m + s][i] += hd[k][r] * phiv[r * m + s][i];
      }
      std::vector<int> acc(n);
      for (std::uint32_t h = 0; h < qh_; ++h)
        for (std::uint32_t k = 0; k < qh_; ++k) {
          std::fill(acc.begin(), acc.end(), 0);
          for (int s = 0; s < m; ++s) {
            if (hd[h][s]) {
              const auto& l = L[k * m + s];
              for (int i = 0; i < n; ++i) acc[i] -= hd[h][s] * l[i];
            }
            if (hd[h][s] + hd[k][s] >= p)
              for (int i = 0; i < n; ++i) acc[i] += phiv[s * m + s][i];
          }
          std::uint32_t c = 0;
          for (int i = n - 1; i >= 0; --i) c = c * p + modp(acc[i], p);
          phi_[h * qh_ + k] = c;
        }
    } else {
      std::vector<Vec> hd(qh_);
      for (std::uint32_t k = 0; k < qh_; ++k) hd[k] = digits(k, p, m);
      for (std::uint32_t h = 0; h < qh_; ++h)
        for (std::uint32_t k = 0; k < qh_; ++k) phi_[h * qh_ + k] = undigits(cocycle_eval(D_, hd[h], hd[k]), p);
    }
  }
  inv_.assign(order_, 0);
  for (std::uint32_t x = 0; x < order_; ++x) {
    std::uint32_t a = x % qa_, h = x / qa_;
    std::uint32_t hi = digit_neg(h, p, m);
    std::uint32_t t = n ? a_add(a, phi_[h * qh_ + hi]) : 0;
    std::uint32_t b = act_[hi * qa_ + digit_neg(t, p, n)];
    inv_[x] = b + qa_ * hi;
  }
}

std::uint32_t RealizedGroup::a_add(std::uint32_t x, std::uint32_t y) const { return digit_add(x, y, D_.p, D_.n); }
std::uint32_t RealizedGroup::h_add(std::uint32_t x, std::uint32_t y) const { return digit_add(x, y, D_.p, D_.m); }

Code RealizedGroup::encode(const GroupElement& x) const {
  if (static_cast<int>(x.a.size()) != D_.n || static_cast<int>(x.h.size()) != D_.m)
    throw Error(ErrorCode::InvalidInput, "group element has the wrong shape");
  return undigits(x.a, D_.p) + qa_ * undigits(x.h, D_.p);
}

GroupElement RealizedGroup::decode(Code c) const {
  return {digits(c % qa_, D_.p, D_.n), digits(c / qa_, D_.p, D_.m)};
}

std::vector<Code> RealizedGroup::generators() const {
  std::vector<Code> g;
  for (int i = 0; i < D_.n; ++i) g.push_back(ipow(D_.p, i));
  for (int r = 0; r < D_.m; ++r) g.push_back(qa_ * ipow(D_.p, r));
  return g;
}

Code RealizedGroup::mul(Code x, Code y) const {
  std::uint32_t ax = x % qa_, hx = x / qa_, ay = y % qa_, hy = y / qa_;
  std::uint32_t a = act_[hx * qa_ + ay];
  if (D_.n) a = a_add(a_add(ax, a), phi_[hx * qh_ + hy]);
  return a + qa_ * h_add(hx, hy);
}

Code RealizedGroup::pow(Code x, std::uint64_t k) const {
  Code r = identity();
  while (k) {
    if (k & 1) r = mul(r, x);
    x = mul(x, x);
    k >>= 1;
  }
  return r;
}

std::uint64_t RealizedGroup::element_order(Code x) const {
  std::uint64_t o = 1;
  while (x != identity()) {
    x = pow(x, D_.p);
    o *= D_.p;
  }
  return o;
}

GroupElement RealizedGroup::multiply(const GroupElement& x, const GroupElement& y) const {
  return decode(mul(encode(x), encode(y)));
}

GroupElement RealizedGroup::inverse(const GroupElement& x) const { return decode(inv(encode(x))); }

// ---------------------------------------------------------------------------
// Subgroups and series.

std::vector<Code> subgroup_closure(const RealizedGroup& G, const std::vector<Code>& gens) {
  Closure C(G);
  for (Code g : gens) C.add(g);
  return C.sorted();
}

std::vector<Code> normal_closure(const RealizedGroup& G, const std::vector<Code>& gens) {
  return normal_closure_of(G, gens).sorted();
}

std::uint64_t group_exponent(const RealizedGroup& G) {
  std::uint64_t e = 1;
  for (Code x = 0; x < G.order(); ++x) e = std::max(e, G.element_order(x));
  return e;
}

std::vector<Code> derived_subgroup(const RealizedGroup& G) {
  auto g = G.generators();
  std::vector<Code> X;
  for (size_t i = 0; i < g.size(); ++i)
    for (size_t j = i + 1; j < g.size(); ++j) X.push_back(G.comm(g[i], g[j]));
  return normal_closure(G, X);
}

std::vector<Code> center(const RealizedGroup& G) {
  auto g = G.generators();
  std::vector<Code> Z;
  for (Code x = 0; x < G.order(); ++x) {
    bool central = true;
    for (Code y : g)
      if (G.mul(x, y) != G.mul(y, x)) {
        central = false;
        break;
      }
    if (central) Z.push_back(x);
  }
  return Z;
}

std::optional<Mat> derived_coordinates(const RealizedGroup& G) {
  const auto& D = G.datum();
  std::vector<Vec> rows;
  for (Code x : derived_subgroup(G)) {
    GroupElement e = G.decode(x);
    for (u8 v : e.h)
      if (v) return std::nullopt;
    rows.push_back(e.a);
  }
  return row_space(stack_rows(rows, D.p, D.n));
}

std::vector<std::uint64_t> lower_central_orders(const RealizedGroup& G) {
  std::vector<std::uint64_t> out{G.order()};
  auto Ggens = G.generators();
  std::vector<Code> X = Ggens;
  while (out.back() > 1) {
    std::vector<Code> Y;
    for (Code x : X)
      for (Code g : Ggens) Y.push_back(G.comm(x, g));
    Closure N = normal_closure_of(G, Y);
    if (N.elems.size() == out.back()) break;  // not nilpotent; cannot happen for p-groups
    out.push_back(N.elems.size());
    X = N.gens;
  }
  return out;
}

int nilpotency_class(const RealizedGroup& G) {
  auto lcs = lower_central_orders(G);
  if (lcs.back() != 1) throw Error(ErrorCode::InvalidInput, "nilpotency_class: group is not nilpotent");
  return static_cast<int>(lcs.size()) - 1;
}

std::map<std::uint64_t, std::uint64_t> conjugacy_class_sizes(const RealizedGroup& G) {
  std::map<std::uint64_t, std::uint64_t> sizes;
  auto g = G.generators();
  std::vector<char> seen(G.order(), 0);
  std::vector<Code> orbit;
  for (Code x = 0; x < G.order(); ++x) {
    if (seen[x]) continue;
    orbit.assign(1, x);
    seen[x] = 1;
    for (size_t i = 0; i < orbit.size(); ++i)
      for (Code y : g) {
        Code c = G.mul(G.mul(y, orbit[i]), G.inv(y));
        if (!seen[c]) {
          seen[c] = 1;
          orbit.push_back(c);
        }
      }
    ++sizes[orbit.size()];
  }
  return sizes;
}

// ---------------------------------------------------------------------------
// Fingerprints.

namespace {

// Fills the two functional-based profiles of f (see GroupFingerprint).
void functional_profiles(const RealizedGroup& G, GroupFingerprint& f) {
  auto coords = derived_coordinates(G);
  if (!coords) return;
  const int p = G.p();
  const RrefResult R = rref_rank(*coords);
  const int k = R.rank;
  const auto gens = G.generators();
  auto tvec = [&](Code c) {  // coordinates of c in G' w.r.t. the RREF basis
    GroupElement e = G.decode(c);
    Vec t(k);
    for (int i = 0; i < k; ++i) t[i] = e.a[R.pivots[i]];
    return t;
  };
  // G-invariant functionals: f(g b g^{-1}) = f(b) for generators g, basis b.
  std::vector<Code> basis;
  for (int i = 0; i < k; ++i) {
    GroupElement e{R.R.row_vec(i), Vec(G.datum().m, 0)};
    basis.push_back(G.encode(e));
  }
  std::vector<Vec> conjDiff;  // t(g b g^-1) - t(b)
  for (Code g : gens)
    for (int i = 0; i < k; ++i) {
      Vec a = tvec(G.mul(G.mul(g, basis[i]), G.inv(g)));
      a[i] = static_cast<u8>(modp(a[i] - 1, p));
      conjDiff.push_back(a);
    }
  auto dot = [&](const Vec& x, const Vec& y) {
    int s = 0;
    for (int i = 0; i < k; ++i) s += x[i] * y[i];
    return s % p;
  };
  std::vector<Vec> funcs;
  for (const Vec& fv : all_vectors(p, k, false, true)) {
    bool inv = true;
    for (const Vec& c : conjDiff)
      if (dot(fv, c)) {
        inv = false;
        break;
      }
    if (inv) funcs.push_back(fv);
  }
  // Per element: which invariant functionals vanish on [x, G].
  const std::size_t nf = funcs.size();
  std::vector<std::uint64_t> cf(nf, 0);
  std::vector<std::vector<char>> kills(G.order());
  for (Code x = 0; x < G.order(); ++x) {
    std::vector<Vec> cs;
    for (Code g : gens) cs.push_back(tvec(G.comm(x, g)));
    auto& kx = kills[x];
    kx.assign(nf, 1);
    for (std::size_t j = 0; j < nf; ++j)
      for (const Vec& c : cs)
        if (dot(funcs[j], c)) {
          kx[j] = 0;
          break;
        }
    for (std::size_t j = 0; j < nf; ++j) cf[j] += kx[j];
  }
  for (std::size_t j = 0; j < nf; ++j) ++f.centralKernelProfile[cf[j]];
  for (std::size_t j = 0; j < nf; ++j) {
    std::vector<Code> Rf;
    for (Code x = 0; x < G.order(); ++x)
      if (kills[x][j]) Rf.push_back(x);
    // A generating set of R_f, grown until its closure is all of R_f.
    std::vector<Code> rgens, span{0};
    std::vector<char> inSpan(G.order(), 0);
    inSpan[0] = 1;
    for (Code x : Rf) {
      if (inSpan[x]) continue;
      rgens.push_back(x);
      span = subgroup_closure(G, rgens);
      for (Code y : span) inSpan[y] = 1;
      if (span.size() == Rf.size()) break;
    }
    std::vector<std::uint64_t> cnt(nf, 0);
    for (Code x : Rf) {
      std::vector<Vec> cs;
      for (Code g : rgens) cs.push_back(tvec(G.comm(x, g)));
      for (std::size_t l = 0; l < nf; ++l) {
        bool all = true;
        for (const Vec& c : cs)
          if (dot(funcs[l], c)) {
            all = false;
            break;
          }
        cnt[l] += all;
      }
    }
    for (std::size_t l = 0; l < nf; ++l) ++f.functionalPairProfile[{cf[j], cf[l], cnt[l]}];
  }
  for (Code x = 0; x < G.order(); ++x) {
    std::map<std::uint64_t, std::uint64_t> sig;
    for (std::size_t j = 0; j < nf; ++j)
      if (kills[x][j]) ++sig[cf[j]];
    ++f.elementSignatureProfile[sig];
  }
}

// Centralizers are constant on cosets of Z(G); distinct ones are kept as
// bitsets with multiplicities and intersected pairwise.
std::map<std::uint64_t, std::uint64_t> centralizer_pairs(const RealizedGroup& G, const std::vector<Code>& Z) {
  const std::size_t N = G.order(), W = (N + 63) / 64;
  std::map<std::vector<std::uint64_t>, std::uint64_t> cents;
  std::vector<char> seen(N, 0);
  std::vector<std::vector<Code>> cosets;
  for (Code x = 0; x < N; ++x) {
    if (seen[x]) continue;
    cosets.emplace_back();
    for (Code z : Z) {
      seen[G.mul(x, z)] = 1;
      cosets.back().push_back(G.mul(x, z));
    }
  }
  for (const auto& cx : cosets) {
    const Code x = cx[0];
    std::vector<std::uint64_t> bits(W, 0);
    for (const auto& cy : cosets)
      if (G.mul(x, cy[0]) == G.mul(cy[0], x))
        for (Code y : cy) bits[y / 64] |= 1ULL << (y % 64);
    cents[bits] += Z.size();
  }
  std::map<std::uint64_t, std::uint64_t> out;
  for (const auto& [a, ca] : cents)
    for (const auto& [b, cb] : cents) {
      std::uint64_t n = 0;
      for (std::size_t w = 0; w < W; ++w) n += static_cast<std::uint64_t>(__builtin_popcountll(a[w] & b[w]));
      out[n] += ca * cb;
    }
  return out;
}

std::map<std::uint64_t, std::uint64_t> mul_profile(const std::map<std::uint64_t, std::uint64_t>& a,
                                                   const std::map<std::uint64_t, std::uint64_t>& b) {
  std::map<std::uint64_t, std::uint64_t> out;
  for (auto [s1, c1] : a)
    for (auto [s2, c2] : b) out[s1 * s2] += c1 * c2;
  return out;
}

}  // namespace

GroupFingerprint group_fingerprint(const RealizedGroup& G, std::uint64_t budget) {
  if (G.order() > budget) throw Error(ErrorCode::BudgetExceeded, "group_fingerprint: order exceeds budget");
  GroupFingerprint f;
  f.order = G.order();
  f.exponent = group_exponent(G);
  auto der = derived_subgroup(G);
  auto Z = center(G);
  f.derivedOrder = der.size();
  f.centerOrder = Z.size();
  f.lowerCentralOrders = lower_central_orders(G);
  f.conjClassSizes = conjugacy_class_sizes(G);
  for (auto [size, count] : f.conjClassSizes) f.centralizerOrders[G.order() / size] += count;
  std::vector<Code> meet;
  std::set_intersection(der.begin(), der.end(), Z.begin(), Z.end(), std::back_inserter(meet));
  f.derivedMeetCenterOrder = meet.size();
  functional_profiles(G, f);
  f.centralizerPairProfile = centralizer_pairs(G, Z);
  return f;
}

GroupFingerprint fingerprint_product(const GroupFingerprint& f1, const GroupFingerprint& f2) {
  GroupFingerprint f;
  f.order = f1.order * f2.order;
  f.exponent = std::max(f1.exponent, f2.exponent);
  f.derivedOrder = f1.derivedOrder * f2.derivedOrder;
  f.centerOrder = f1.centerOrder * f2.centerOrder;
  size_t len = std::max(f1.lowerCentralOrders.size(), f2.lowerCentralOrders.size());
  for (size_t i = 0; i < len; ++i) {
    std::uint64_t a = i < f1.lowerCentralOrders.size() ? f1.lowerCentralOrders[i] : 1;
    std::uint64_t b = i < f2.lowerCentralOrders.size() ? f2.lowerCentralOrders[i] : 1;
    f.lowerCentralOrders.push_back(a * b);
  }
  for (auto [s1, c1] : f1.conjClassSizes)
    for (auto [s2, c2] : f2.conjClassSizes) f.conjClassSizes[s1 * s2] += c1 * c2;
  for (auto [s1, c1] : f1.centralizerOrders)
    for (auto [s2, c2] : f2.centralizerOrders) f.centralizerOrders[s1 * s2] += c1 * c2;
  f.derivedMeetCenterOrder = f1.derivedMeetCenterOrder * f2.derivedMeetCenterOrder;
  // A functional on G1' x G2' is a pair (f1, f2); it is invariant iff both
  // parts are, and it kills [(x, y), G] iff f1 kills [x, G1] and f2 kills [y, G2].
  f.centralizerPairProfile = mul_profile(f1.centralizerPairProfile, f2.centralizerPairProfile);
  if (!f1.centralKernelProfile.empty() && !f2.centralKernelProfile.empty()) {
    f.centralKernelProfile = mul_profile(f1.centralKernelProfile, f2.centralKernelProfile);
    for (const auto& [s1, c1] : f1.elementSignatureProfile)
      for (const auto& [s2, c2] : f2.elementSignatureProfile) f.elementSignatureProfile[mul_profile(s1, s2)] += c1 * c2;
    for (const auto& [t1, c1] : f1.functionalPairProfile)
      for (const auto& [t2, c2] : f2.functionalPairProfile)
        f.functionalPairProfile[{t1[0] * t2[0], t1[1] * t2[1], t1[2] * t2[2]}] += c1 * c2;
  }
  return f;
}

nlohmann::json fingerprint_to_json(const GroupFingerprint& f) {
  auto pairs = [](const std::map<std::uint64_t, std::uint64_t>& m) {
    nlohmann::json j = nlohmann::json::array();
    for (auto [k, v] : m) j.push_back({k, v});
    return j;
  };
  nlohmann::json sigs = nlohmann::json::array();
  for (const auto& [sig, count] : f.elementSignatureProfile) sigs.push_back({pairs(sig), count});
  nlohmann::json fpairs = nlohmann::json::array();
  for (const auto& [t, count] : f.functionalPairProfile) fpairs.push_back({t, count});
  return {{"order", f.order},
          {"exponent", f.exponent},
          {"derivedOrder", f.derivedOrder},
          {"centerOrder", f.centerOrder},
          {"lowerCentralOrders", f.lowerCentralOrders},
          {"conjClassSizes", pairs(f.conjClassSizes)},
          {"centralizerOrders", pairs(f.centralizerOrders)},
          {"derivedMeetCenterOrder", f.derivedMeetCenterOrder},
          {"centralKernelProfile", pairs(f.centralKernelProfile)},
          {"elementSignatureProfile", sigs},
          {"functionalPairProfile", fpairs},
          {"centralizerPairProfile", pairs(f.centralizerPairProfile)}};
}

// ---------------------------------------------------------------------------
// Central Z_p factors.

std::optional<ZpSplit> zp_split(const RealizedGroup& G) {
  if (G.order() == 1) return std::nullopt;
  if (group_exponent(G) != static_cast<std::uint64_t>(G.p()))
    throw Error(ErrorCode::InvalidInput, "zp_split: group must have exponent p");
  auto der = derived_subgroup(G);
  std::vector<char> inDer(G.order(), 0);
  for (Code x : der) inDer[x] = 1;
  std::optional<Code> z;
  for (Code x : center(G))
    if (!inDer[x]) {
      z = x;
      break;
    }
  if (!z) return std::nullopt;
  // With exponent p the Frattini subgroup is G'; grow a subgroup containing G'
  // and avoiding z. Each generator g (adjusted by a power of z) either already
  // lies in it or can be added, so the result has index p.
  Closure M(G);
  for (Code x : der) M.add(x);
  for (Code g : G.generators()) {
    Code gz = g;
    for (int c = 0; c < G.p(); ++c, gz = G.mul(gz, *z)) {
      if (M.contains(gz)) break;
      Closure trial = M;
      trial.add(gz);
      if (!trial.contains(*z)) {
        M = std::move(trial);
        break;
      }
    }
  }
  if (M.elems.size() * G.p() != G.order() || M.contains(*z))
    throw Error(ErrorCode::InvalidInput, "zp_split: complement construction failed");
  return ZpSplit{G.decode(*z), M.sorted()};
}

// ---------------------------------------------------------------------------
// Presentations.

std::string Presentation::generator_name(int g) const {
  return g < n ? "a" + std::to_string(g + 1) : "h" + std::to_string(g - n + 1);
}

namespace {

std::string word_text(const Presentation& P, const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (auto [g, e] : w) {
    if (!s.empty()) s += "*";
    s += P.generator_name(g);
    if (e != 1) s += "^" + std::to_string(e);
  }
  return s;
}

Word coords_word(const Vec& v) {
  Word w;
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i]) w.push_back({static_cast<int>(i), v[i]});
  return w;
}

}  // namespace

std::string Presentation::to_text() const {
  std::string out;
  for (const auto& r : relators) {
    if (r.kind == Relator::Kind::Power)
      out += generator_name(r.g1) + "^" + std::to_string(p);
    else
      out += "[" + generator_name(r.g1) + "," + generator_name(r.g2) + "]";
    out += "=" + word_text(*this, r.rhs) + "\n";
  }
  return out;
}

nlohmann::json Presentation::to_json() const {
  nlohmann::json gens = nlohmann::json::array(), rels = nlohmann::json::array();
  for (int g = 0; g < n + m; ++g) gens.push_back(generator_name(g));
  for (const auto& r : relators) {
    nlohmann::json rhs = nlohmann::json::array();
    for (auto [g, e] : r.rhs) rhs.push_back({generator_name(g), e});
    if (r.kind == Relator::Kind::Power)
      rels.push_back({{"kind", "power"}, {"generator", generator_name(r.g1)}, {"exponent", p}, {"rhs", rhs}});
    else
      rels.push_back({{"kind", "commutator"}, {"left", generator_name(r.g1)}, {"right", generator_name(r.g2)}, {"rhs", rhs}});
  }
  return {{"p", p}, {"generators", gens}, {"relators", rels}};
}

Presentation emit_presentation(const ExtDatum& D) {
  validate_datum(D);
  Presentation P;
  P.p = D.p;
  P.m = D.m;
  P.n = D.n;
  using K = Relator::Kind;
  for (int i = 0; i < D.n; ++i) P.relators.push_back({K::Power, i, i, {}});
  // h_r^p = phi_rr, which is 1 for exponent-p data.
  for (int r = 0; r < D.m; ++r) P.relators.push_back({K::Power, D.n + r, D.n + r, coords_word(D.phi(r, r))});
  for (int i = 0; i < D.n; ++i)
    for (int j = i + 1; j < D.n; ++j) P.relators.push_back({K::Commutator, i, j, {}});
  for (int r = 0; r < D.m; ++r)
    for (int i = 0; i < D.n; ++i) {
      // [h_r, a_i] = rho(h_r) a_i - a_i = sum_j (Gamma_ji - delta_ij) a_j
      Vec v = D.gammas[r].col_vec(i);
      v[i] = static_cast<u8>(modp(v[i] - 1, D.p));
      P.relators.push_back({K::Commutator, D.n + r, i, coords_word(v)});
    }
  for (int r = 0; r < D.m; ++r)
    for (int s = r + 1; s < D.m; ++s) P.relators.push_back({K::Commutator, D.n + r, D.n + s, coords_word(D.phi(r, s))});
  return P;
}

bool presentation_defines_group(const Presentation& P, const RealizedGroup& G) {
  const auto& D = G.datum();
  if (P.p != D.p || P.m != D.m || P.n != D.n) return false;
  auto gens = G.generators();
  auto eval = [&](const Word& w) {
    Code c = G.identity();
    for (auto [g, e] : w) c = G.mul(c, G.pow(gens.at(g), modp(e, D.p)));
    return c;
  };
  using K = Relator::Kind;
  std::set<std::tuple<int, int, int>> have;
  for (const auto& r : P.relators) {
    Code lhs = r.kind == K::Power ? G.pow(gens.at(r.g1), P.p) : G.comm(gens.at(r.g1), gens.at(r.g2));
    if (lhs != eval(r.rhs)) return false;
    for (auto [g, e] : r.rhs)
      if (g >= D.n) return false;  // right-hand sides must lie in <a_1, ..., a_n>
    have.insert({r.kind == K::Power ? 0 : 1, r.g1, r.g2});
  }
  // Shape: all powers, all [a_i, a_j], all [h_r, a_i], all [h_r, h_s]. Then
  // <a_i> is a normal elementary abelian subgroup of order <= p^n with an
  // elementary abelian quotient of order <= p^m.
  for (int g = 0; g < D.n + D.m; ++g)
    if (!have.count({0, g, g})) return false;
  for (int i = 0; i < D.n; ++i)
    for (int j = i + 1; j < D.n; ++j)
      if (!have.count({1, i, j})) return false;
  for (int r = 0; r < D.m; ++r) {
    for (int i = 0; i < D.n; ++i)
      if (!have.count({1, D.n + r, i})) return false;
    for (int s = r + 1; s < D.m; ++s)
      if (!have.count({1, D.n + r, D.n + s})) return false;
  }
  return true;
}

}  // namespace pga
