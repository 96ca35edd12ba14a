#include "pga/subspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

#include "smallla.hpp"

namespace pga {

// ---------------------------------------------------------------------------
// SkewSubspace basics

std::vector<SkewForm> SkewSubspace::forms() const {
  std::vector<SkewForm> out;
  for (int i = 0; i < d; ++i) out.push_back(skew_from_vec(p, m, basis.row_vec(i)));
  return out;
}

SkewForm SkewSubspace::element(const Vec& c) const {
  const int D = ambient_dim();
  Vec v(D, 0);
  for (int i = 0; i < d; ++i) {
    if (!c[i]) continue;
    for (int j = 0; j < D; ++j) v[j] = static_cast<u8>((v[j] + c[i] * basis.at(i, j)) % p);
  }
  return skew_from_vec(p, m, v);
}

bool SkewSubspace::operator<(const SkewSubspace& o) const {
  if (p != o.p) return p < o.p;
  if (m != o.m) return m < o.m;
  if (d != o.d) return d < o.d;
  return basis.e < o.basis.e;
}

SkewSubspace subspace_from_rows(int p, int m, const Mat& rows) {
  SkewSubspace V;
  V.p = p;
  V.m = m;
  if (rows.rows == 0) {
    V.basis = Mat(p, 0, skew_dim(m));
    return V;
  }
  V.basis = row_space(rows);
  V.d = V.basis.rows;
  return V;
}

SkewSubspace canonical_basis(int p, int m, const std::vector<SkewForm>& forms) {
  std::vector<Vec> rows;
  for (const auto& X : forms) {
    if (X.p != p || X.rows != m) throw Error(ErrorCode::InvalidInput, "forms must share (p, m)");
    validate_skew(X);
    rows.push_back(skew_to_vec(X));
  }
  return subspace_from_rows(p, m, stack_rows(rows, p, skew_dim(m)));
}

SkewSubspace zero_subspace(int p, int m) { return subspace_from_rows(p, m, Mat(p, 0, skew_dim(m))); }

SkewSubspace full_subspace(int p, int m) { return subspace_from_rows(p, m, Mat::identity(p, skew_dim(m))); }

Mat congruence_action_matrix(const Mat& P) {
  const int p = P.p, m = P.rows, D = skew_dim(m);
  Mat A(p, D, D);
  for (int c = 0; c < D; ++c) {
    Vec e(D, 0);
    e[c] = 1;
    Vec img = skew_to_vec(congruent(P, skew_from_vec(p, m, e)));
    for (int j = 0; j < D; ++j) A.at(c, j) = img[j];
  }
  return A;
}

SkewSubspace transform(const SkewSubspace& V, const Mat& P) {
  if (V.d == 0) return V;
  std::vector<SkewForm> fs;
  for (const auto& X : V.forms()) fs.push_back(congruent(P, X));
  return canonical_basis(V.p, V.m, fs);
}

SkewSubspace extend(const SkewSubspace& V, const Vec& v) {
  Mat rows = vstack(V.basis, stack_rows({v}, V.p, V.ambient_dim()));
  return subspace_from_rows(V.p, V.m, rows);
}

SkewSubspace pad_subspace(const SkewSubspace& V) {
  std::vector<SkewForm> fs;
  for (const auto& X : V.forms()) {
    SkewForm Y(V.p, V.m + 1, V.m + 1);
    Y.set_block(0, 0, X);
    fs.push_back(Y);
  }
  if (fs.empty()) return zero_subspace(V.p, V.m + 1);
  return canonical_basis(V.p, V.m + 1, fs);
}

SkewSubspace random_subspace(int p, int m, int d, std::uint64_t seed) {
  const int D = skew_dim(m);
  if (d < 0 || d > D) throw Error(ErrorCode::InvalidInput, "random_subspace: d out of range");
  std::mt19937_64 rng(seed);
  if (d == 0) return zero_subspace(p, m);
  for (;;) {
    Mat M = random_mat(p, d, D, rng);
    if (rank(M) == d) return subspace_from_rows(p, m, M);
  }
}

// ---------------------------------------------------------------------------
// Counting

BigInt subspace_count(int p, int D, int d) {
  if (d < 0 || d > D) return 0;
  BigInt num = 1, den = 1, P = p;
  for (int i = 0; i < d; ++i) {
    num *= boost::multiprecision::pow(P, D - i) - 1;
    den *= boost::multiprecision::pow(P, i + 1) - 1;
  }
  return num / den;
}

BigInt gl_order(int p, int m) {
  BigInt r = 1, P = p;
  BigInt pm = boost::multiprecision::pow(P, m);
  for (int i = 0; i < m; ++i) r *= pm - boost::multiprecision::pow(P, i);
  return r;
}

std::vector<Vec> all_vectors(int p, int n, bool projective, bool includeZero) {
  std::vector<Vec> out;
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= p;
  Vec v(n, 0);
  for (std::uint64_t c = 0; c < total; ++c) {
    std::uint64_t x = c;
    for (int j = n - 1; j >= 0; --j) {
      v[j] = static_cast<u8>(x % p);
      x /= p;
    }
    int first = -1;
    for (int j = 0; j < n; ++j)
      if (v[j]) {
        first = j;
        break;
      }
    if (first < 0) {
      if (includeZero) out.push_back(v);
      continue;
    }
    if (projective && v[first] != 1) continue;
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  if (k > n) return;
  for (;;) {
    fn(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

// All rows x cols RREF matrices of full row rank, in the documented order.
void for_each_rref(int p, int rows, int cols, const std::function<void(const Mat&)>& emit) {
  if (rows == 0) {
    emit(Mat(p, 0, cols));
    return;
  }
  for_each_combination(cols, rows, [&](const std::vector<int>& piv) {
    std::vector<bool> isPiv(cols, false);
    for (int c : piv) isPiv[c] = true;
    std::vector<std::pair<int, int>> freePos;
    for (int i = 0; i < rows; ++i)
      for (int j = piv[i] + 1; j < cols; ++j)
        if (!isPiv[j]) freePos.push_back({i, j});
    Mat B(p, rows, cols);
    for (int i = 0; i < rows; ++i) B.at(i, piv[i]) = 1;
    const int F = static_cast<int>(freePos.size());
    std::vector<int> digit(F, 0);
    for (;;) {
      emit(B);
      int t = F - 1;
      while (t >= 0) {
        auto [i, j] = freePos[t];
        if (++digit[t] < p) {
          B.at(i, j) = static_cast<u8>(digit[t]);
          break;
        }
        digit[t] = 0;
        B.at(i, j) = 0;
        --t;
      }
      if (t < 0) break;
    }
  });
}

}  // namespace

void enumerate_subspaces(int p, int m, int d, const std::function<void(const Mat&)>& emit, std::uint64_t budget) {
  const int D = skew_dim(m);
  if (d < 0 || d > D) throw Error(ErrorCode::InvalidInput, "enumerate_subspaces: d out of range");
  BigInt count = subspace_count(p, D, d);
  if (count > budget)
    throw Error(ErrorCode::BudgetExceeded, "Gr(" + std::to_string(d) + ", AS_" + std::to_string(m) + ") has " +
                                               count.str() + " points, budget is " + std::to_string(budget));
  for_each_rref(p, d, D, emit);
}

std::vector<SkewSubspace> enumerate_subspaces_list(int p, int m, int d, std::uint64_t budget) {
  std::vector<SkewSubspace> out;
  enumerate_subspaces(
      p, m, d,
      [&](const Mat& B) {
        SkewSubspace V;
        V.p = p;
        V.m = m;
        V.d = d;
        V.basis = B;
        out.push_back(std::move(V));
      },
      budget);
  return out;
}

// ---------------------------------------------------------------------------
// Per-subspace precomputation shared by fingerprints and the search

namespace {

struct SpaceData {
  int p = 3, m = 0, d = 0;
  int nv = 1;                      // p^m vectors
  int nc = 1;                      // p^d coefficient vectors
  std::vector<u8> X;               // d forms, each m*m
  std::vector<u8> uX;              // per vector code: d rows (u X_i), each of length m
  std::vector<int> elemRank;       // per coefficient code
  std::vector<std::vector<int>> sig;  // per vector code; empty for the zero vector
  std::vector<int> uRank;          // rank of the d x m matrix (u X_i)_i

  const u8* ux(int code, int i) const { return uX.data() + (static_cast<size_t>(code) * d + i) * m; }
};

SpaceData build_space(const SkewSubspace& V) {
  SpaceData S;
  S.p = V.p;
  S.m = V.m;
  S.d = V.d;
  const int p = S.p, m = S.m, d = S.d;
  S.nv = ipow(p, m);
  S.nc = ipow(p, d);
  auto fs = V.forms();
  S.X.resize(static_cast<size_t>(d) * m * m);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) S.X[(static_cast<size_t>(i) * m + a) * m + b] = fs[i].at(a, b);

  // Ranks of all elements of V.
  S.elemRank.assign(S.nc, 0);
  {
    std::vector<u8> buf(static_cast<size_t>(m) * m);
    std::vector<u8> c(d);
    for (int code = 0; code < S.nc; ++code) {
      decode(code, p, d, c.data());
      std::fill(buf.begin(), buf.end(), 0);
      for (int i = 0; i < d; ++i) {
        if (!c[i]) continue;
        const u8* Xi = S.X.data() + static_cast<size_t>(i) * m * m;
        for (int t = 0; t < m * m; ++t) buf[t] = static_cast<u8>((buf[t] + c[i] * Xi[t]) % p);
      }
      S.elemRank[code] = rank_inplace(buf.data(), m, m, p);
    }
  }

  // u X_i for every vector u.
  S.uX.assign(static_cast<size_t>(S.nv) * d * m, 0);
  std::vector<u8> u(m);
  for (int code = 0; code < S.nv; ++code) {
    decode(code, p, m, u.data());
    for (int i = 0; i < d; ++i) {
      const u8* Xi = S.X.data() + static_cast<size_t>(i) * m * m;
      u8* out = S.uX.data() + (static_cast<size_t>(code) * d + i) * m;
      for (int b = 0; b < m; ++b) {
        unsigned s = 0;
        for (int a = 0; a < m; ++a) s += u[a] * Xi[a * m + b];
        out[b] = static_cast<u8>(s % p);
      }
    }
  }

  // Per-vector signature: (rank of {uX : X in V}, rank distribution over the
  // nonzero X in V with uX = 0).
  S.sig.assign(S.nv, {});
  S.uRank.assign(S.nv, 0);
  const int nr = m / 2 + 1;
  std::vector<u8> A(static_cast<size_t>(m) * std::max(d, 1));
  std::vector<u8> ker(static_cast<size_t>(std::max(d, 1)) * std::max(d, 1));
  std::vector<u8> c(std::max(d, 1));
  for (int code = 1; code < S.nv; ++code) {
    // A is m x d with column i = (u X_i)^T.
    for (int i = 0; i < d; ++i) {
      const u8* r = S.ux(code, i);
      for (int b = 0; b < m; ++b) A[static_cast<size_t>(b) * d + i] = r[b];
    }
    int kd = d ? kernel_inplace(A.data(), m, d, p, ker.data()) : 0;
    int rk = d - kd;
    std::vector<int> sg(1 + nr, 0);
    sg[0] = rk;
    // Enumerate kernel elements.
    int total = ipow(p, kd);
    for (int t = 1; t < total; ++t) {
      int x = t;
      std::fill(c.begin(), c.end(), 0);
      for (int j = kd - 1; j >= 0; --j) {
        int coef = x % p;
        x /= p;
        if (!coef) continue;
        for (int i = 0; i < d; ++i) c[i] = static_cast<u8>((c[i] + coef * ker[static_cast<size_t>(j) * d + i]) % p);
      }
      sg[1 + S.elemRank[encode(c.data(), d, p)] / 2] += 1;
    }
    S.uRank[code] = rk;
    S.sig[code] = std::move(sg);
  }
  return S;
}

template <class T>
Profile<T> to_profile(const std::map<T, std::uint64_t>& m) {
  return Profile<T>(m.begin(), m.end());
}

bool is_projective_code(int code, int p, int n) {
  // first nonzero digit (most significant) equals 1
  std::vector<u8> v(n);
  decode(code, p, n, v.data());
  for (int j = 0; j < n; ++j)
    if (v[j]) return v[j] == 1;
  return false;
}

}  // namespace

std::uint64_t Fingerprint::low_rank_count(int p) const {
  std::uint64_t n = 0;
  for (auto [r, c] : rankMultiset)
    if (r < 4) n += c;
  return 1 + static_cast<std::uint64_t>(p - 1) * n;
}

Fingerprint invariant_fingerprint(const SkewSubspace& V) {
  SpaceData S = build_space(V);
  const int p = S.p, m = S.m, d = S.d;
  Fingerprint f;

  // Common radical: v X_i = 0 for all i.
  {
    std::vector<u8> H(static_cast<size_t>(m) * m * std::max(d, 1), 0);
    // rows a of [X_1 | ... | X_d]
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < d; ++i)
        for (int b = 0; b < m; ++b) H[static_cast<size_t>(a) * m * d + i * m + b] = S.X[(static_cast<size_t>(i) * m + a) * m + b];
    f.radicalDim = m - (d ? rank_inplace(H.data(), m, m * d, p) : 0);
  }

  std::map<int, std::uint64_t> ranks;
  std::int64_t pfz = 0;
  std::vector<u8> c(std::max(d, 1));
  for (int code = 1; code < S.nc; ++code) {
    if (!is_projective_code(code, p, d)) continue;
    ranks[S.elemRank[code]]++;
    if (m == 4) {
      decode(code, p, d, c.data());
      if (pfaffian4(V.element(Vec(c.begin(), c.begin() + d))) == 0) ++pfz;
    }
  }
  f.rankMultiset = to_profile(ranks);
  f.pfZeroCount = (m == 4) ? pfz : -1;

  std::map<int, std::uint64_t> lines;
  std::map<std::vector<int>, std::uint64_t> sigs;
  for (int code = 1; code < S.nv; ++code) {
    if (!is_projective_code(code, p, m)) continue;
    lines[m - S.uRank[code]]++;
    sigs[S.sig[code]]++;
  }
  f.lineperpProfile = to_profile(lines);
  f.lineSignatureProfile = to_profile(sigs);

  if (m <= 5 && m >= 2) {
    std::map<int, std::uint64_t> planes;
    std::vector<u8> buf(static_cast<size_t>(2) * std::max(d, 1) * m);
    for_each_rref(p, 2, m, [&](const Mat& U) {
      int c0 = encode(U.row(0), m, p), c1 = encode(U.row(1), m, p);
      size_t t = 0;
      for (int i = 0; i < d; ++i) {
        std::copy(S.ux(c0, i), S.ux(c0, i) + m, buf.begin() + t);
        t += m;
        std::copy(S.ux(c1, i), S.ux(c1, i) + m, buf.begin() + t);
        t += m;
      }
      int rk = d ? rank_inplace(buf.data(), 2 * d, m, p) : 0;
      planes[m - rk]++;
    });
    f.planePerpProfile = to_profile(planes);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Congruence search
//
// Rows p_1..p_m of P are chosen one at a time. With rows p_1..p_k fixed, the
// entries (P X_i P^T)_{ab} = p_a X_i p_b^T for a < b <= k are known, and they
// must lie in the projection of W onto those coordinates. Writing that
// projection as the kernel of a matrix L_k turns the choice of p_{k+1} into an
// affine system. W is first moved by a greedily chosen Q so that the early
// projections are as small as possible.

namespace {

constexpr int kMaxM = 12;

class CongruenceSearch {
 public:
  CongruenceSearch(const SkewSubspace& V, const SkewSubspace& W, const SearchOptions& opt)
      : V_(V), W_(W), opt_(opt), sv_(build_space(V)), sw_(build_space(W)) {
    p_ = V.p;
    m_ = V.m;
    d_ = V.d;
    if (m_ > kMaxM) throw Error(ErrorCode::InvalidInput, "congruent_search supports m <= 12");
  }

  // False if the per-vector signature distributions differ.
  bool prepare() {
    std::map<std::vector<int>, int> dict;
    auto idOf = [&](const std::vector<int>& s) {
      auto it = dict.find(s);
      if (it != dict.end()) return it->second;
      int id = static_cast<int>(dict.size());
      dict.emplace(s, id);
      return id;
    };
    idV_.assign(sv_.nv, -1);
    idW_.assign(sw_.nv, -1);
    for (int c = 1; c < sv_.nv; ++c) idV_[c] = idOf(sv_.sig[c]);
    for (int c = 1; c < sw_.nv; ++c) idW_[c] = idOf(sw_.sig[c]);
    const int nid = static_cast<int>(dict.size());
    candByID_.assign(nid, {});
    classSizeW_.assign(nid, 0);
    std::vector<std::uint64_t> cv(nid, 0);
    for (int c = 1; c < sv_.nv; ++c) {
      candByID_[idV_[c]].push_back(c);
      cv[idV_[c]]++;
    }
    for (int c = 1; c < sw_.nv; ++c) classSizeW_[idW_[c]]++;
    if (cv != classSizeW_) return false;
    chooseQ();
    buildLevels();
    return true;
  }

  std::optional<Mat> find_one() {
    mode_ = Mode::Find;
    dfs(0);
    return witness_;
  }

  std::uint64_t count_all(std::uint64_t limit) {
    mode_ = Mode::Count;
    limit_ = limit;
    dfs(0);
    return count_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  enum class Mode { Find, Count };

  static int pidx(int a, int b) { return b * (b - 1) / 2 + a; }  // a < b

  // Greedy choice of the W-side basis rows w_1..w_m.
  void chooseQ() {
    const int p = p_, m = m_, d = d_;
    auto fw = W_.forms();
    std::vector<std::vector<u8>> chosen;  // w rows
    std::vector<std::vector<u8>> Krows;   // accumulated rows of K (length d)
    std::vector<u8> ech;                  // echelon rows of chosen w's for independence
    int echRows = 0;
    std::vector<int> echPiv;
    auto projective = all_vectors(p, m, true);
    Q_ = Mat(p, m, m);
    target_.assign(m, 0);
    for (int k = 0; k < m; ++k) {
      double bestScore = 1e300;
      int best = -1;
      std::vector<std::vector<u8>> bestNew;
      int baseRank = 0;
      {
        std::vector<u8> buf;
        for (auto& r : Krows) buf.insert(buf.end(), r.begin(), r.end());
        baseRank = Krows.empty() || d == 0 ? 0 : rank_inplace(buf.data(), static_cast<int>(Krows.size()), d, p);
      }
      for (int wi = 0; wi < static_cast<int>(projective.size()); ++wi) {
        const Vec& w = projective[wi];
        if (!independent(ech, echRows, echPiv, w.data())) continue;
        // New K rows: (w_a Y_j w^T)_j for a < k.
        std::vector<std::vector<u8>> newRows;
        for (int a = 0; a < k; ++a) {
          std::vector<u8> row(d);
          for (int j = 0; j < d; ++j) row[j] = static_cast<u8>(bilinear(chosen[a].data(), fw[j], w.data()));
          newRows.push_back(row);
        }
        int rk = baseRank;
        if (k > 0 && d > 0) {
          std::vector<u8> buf;
          for (auto& r : Krows) buf.insert(buf.end(), r.begin(), r.end());
          for (auto& r : newRows) buf.insert(buf.end(), r.begin(), r.end());
          rk = rank_inplace(buf.data(), static_cast<int>(Krows.size() + newRows.size()), d, p);
        }
        int dnull = k - (rk - baseRank);
        int code = encode(w.data(), m, p);
        double score = std::log(static_cast<double>(classSizeW_[idW_[code]])) -
                       static_cast<double>(dnull) * d * std::log(static_cast<double>(p));
        if (score < bestScore - 1e-9) {
          bestScore = score;
          best = wi;
          bestNew = std::move(newRows);
        }
      }
      const Vec& w = projective[best];
      chosen.push_back(std::vector<u8>(w.begin(), w.end()));
      for (auto& r : bestNew) Krows.push_back(r);
      add_to_echelon(ech, echRows, echPiv, w.data());
      for (int j = 0; j < m; ++j) Q_.at(k, j) = w[j];
      target_[k] = idW_[encode(w.data(), m, p)];
    }
    // W' = Q W Q^T, stored as flat forms.
    Yp_.assign(static_cast<size_t>(d) * m * m, 0);
    for (int j = 0; j < d; ++j) {
      Mat Y = congruent(Q_, fw[j]);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) Yp_[(static_cast<size_t>(j) * m + a) * m + b] = Y.at(a, b);
    }
  }

  int bilinear(const u8* u, const Mat& Y, const u8* w) const {
    unsigned s = 0;
    for (int a = 0; a < m_; ++a) {
      if (!u[a]) continue;
      unsigned t = 0;
      for (int b = 0; b < m_; ++b) t += Y.at(a, b) * w[b];
      s += u[a] * (t % p_);
    }
    return static_cast<int>(s % p_);
  }

  // Echelon bookkeeping for independence tests (rows of length m).
  bool independent(const std::vector<u8>& ech, int rows, const std::vector<int>& piv, const u8* v) const {
    std::array<u8, kMaxM> t{};
    std::copy(v, v + m_, t.begin());
    reduce(ech, rows, piv, t.data());
    for (int j = 0; j < m_; ++j)
      if (t[j]) return true;
    return false;
  }
  void reduce(const std::vector<u8>& ech, int rows, const std::vector<int>& piv, u8* t) const {
    for (int r = 0; r < rows; ++r) {
      int f = t[piv[r]];
      if (!f) continue;
      const u8* e = ech.data() + static_cast<size_t>(r) * m_;
      int nf = p_ - f;
      for (int j = 0; j < m_; ++j) t[j] = static_cast<u8>((t[j] + nf * e[j]) % p_);
    }
  }
  void add_to_echelon(std::vector<u8>& ech, int& rows, std::vector<int>& piv, const u8* v) const {
    std::array<u8, kMaxM> t{};
    std::copy(v, v + m_, t.begin());
    reduce(ech, rows, piv, t.data());
    int pv = -1;
    for (int j = 0; j < m_; ++j)
      if (t[j]) {
        pv = j;
        break;
      }
    if (pv < 0) return;
    int s = inv_small(t[pv], p_);
    for (int j = 0; j < m_; ++j) t[j] = static_cast<u8>(t[j] * s % p_);
    // keep rows fully reduced with respect to the new pivot
    for (int r = 0; r < rows; ++r) {
      u8* e = ech.data() + static_cast<size_t>(r) * m_;
      int f = e[pv];
      if (!f) continue;
      int nf = p_ - f;
      for (int j = 0; j < m_; ++j) e[j] = static_cast<u8>((e[j] + nf * t[j]) % p_);
    }
    ech.insert(ech.end(), t.begin(), t.begin() + m_);
    piv.push_back(pv);
    ++rows;
  }

  struct Level {
    int count = 0;                       // number of new constraint rows
    std::vector<std::vector<u8>> lnew;   // coefficients on (a, k), a < k
    std::vector<std::vector<u8>> lold;   // coefficients on earlier pairs
  };

  void buildLevels() {
    const int p = p_, m = m_, d = d_;
    levels_.assign(m, {});
    for (int k = 1; k < m; ++k) {
      // Coordinates S_{k+1}: pairs (a,b) with b <= k; new ones are (a,k).
      const int nold = k * (k - 1) / 2, nn = k, ns = nold + nn;
      if (d == 0) {
        // W = 0: every new entry must vanish.
        Level L;
        for (int a = 0; a < k; ++a) {
          std::vector<u8> ln(nn, 0), lo(nold, 0);
          ln[a] = 1;
          L.lnew.push_back(ln);
          L.lold.push_back(lo);
        }
        L.count = k;
        levels_[k] = L;
        continue;
      }
      // Left kernel of K (ns x d), columns reordered new-first.
      // kernel of K^T (d x ns).
      std::vector<u8> KT(static_cast<size_t>(d) * ns);
      for (int j = 0; j < d; ++j) {
        for (int a = 0; a < k; ++a) KT[static_cast<size_t>(j) * ns + a] = Yp_[(static_cast<size_t>(j) * m + a) * m + k];
        for (int b = 1; b < k; ++b)
          for (int a = 0; a < b; ++a)
            KT[static_cast<size_t>(j) * ns + nn + pidx(a, b)] = Yp_[(static_cast<size_t>(j) * m + a) * m + b];
      }
      std::vector<u8> ker(static_cast<size_t>(ns) * ns);
      int kd = kernel_inplace(KT.data(), d, ns, p, ker.data());
      // RREF of the kernel basis with new columns first.
      int rk = rref_inplace(ker.data(), kd, ns, p);
      Level L;
      for (int r = 0; r < rk; ++r) {
        const u8* row = ker.data() + static_cast<size_t>(r) * ns;
        int pv = -1;
        for (int j = 0; j < ns; ++j)
          if (row[j]) {
            pv = j;
            break;
          }
        if (pv < 0 || pv >= nn) continue;
        L.lnew.emplace_back(row, row + nn);
        L.lold.emplace_back(row + nn, row + ns);
      }
      L.count = static_cast<int>(L.lnew.size());
      levels_[k] = L;
    }
    rows_.assign(m, 0);
    rvals_.assign(static_cast<size_t>(std::max(d, 1)) * (m * (m - 1) / 2 + 1), 0);
    ech_.assign(m + 1, {});
    echPiv_.assign(m + 1, {});
  }

  void dfs(int k) {
    if (done_) return;
    if (k == m_) {
      leaf();
      return;
    }
    const int p = p_, m = m_, d = d_;
    const int t = target_[k];
    const Level& L = levels_[k];
    auto tryCandidate = [&](int code) {
      if (done_) return;
      if (idV_[code] != t) return;
      std::array<u8, kMaxM> u{};
      decode(code, p, m, u.data());
      if (!independent(ech_[k], k, echPiv_[k], u.data())) return;
      if (++nodes_ > opt_.nodeBudget)
        throw Error(ErrorCode::BudgetExceeded, "congruence search exceeded " + std::to_string(opt_.nodeBudget) + " nodes");
      rows_[k] = code;
      for (int i = 0; i < d; ++i)
        for (int a = 0; a < k; ++a) {
          const u8* pa = sv_.ux(rows_[a], i);
          unsigned s = 0;
          for (int j = 0; j < m; ++j) s += pa[j] * u[j];
          rvals_[static_cast<size_t>(i) * npairs() + pidx(a, k)] = static_cast<u8>(s % p);
        }
      ech_[k + 1] = ech_[k];
      echPiv_[k + 1] = echPiv_[k];
      int er = k;
      add_to_echelon(ech_[k + 1], er, echPiv_[k + 1], u.data());
      dfs(k + 1);
    };

    if (L.count == 0) {
      for (int code : candByID_[t]) tryCandidate(code);
      return;
    }
    // Affine system in the unknown row u: for each constraint and form X_i,
    // sum_a lnew[a] (p_a X_i) . u = - sum lold . r_i.
    const int nrow = L.count * d;
    std::vector<u8> aug(static_cast<size_t>(nrow) * (m + 1), 0);
    for (int c = 0; c < L.count; ++c)
      for (int i = 0; i < d; ++i) {
        u8* row = aug.data() + static_cast<size_t>(c * d + i) * (m + 1);
        for (int a = 0; a < k; ++a) {
          int f = L.lnew[c][a];
          if (!f) continue;
          const u8* pa = sv_.ux(rows_[a], i);
          for (int j = 0; j < m; ++j) row[j] = static_cast<u8>((row[j] + f * pa[j]) % p);
        }
        unsigned s = 0;
        const int nold = k * (k - 1) / 2;
        for (int q = 0; q < nold; ++q) s += L.lold[c][q] * rvals_[static_cast<size_t>(i) * npairs() + q];
        row[m] = static_cast<u8>((p - s % p) % p);
      }
    std::array<u8, kMaxM> x0{};
    std::vector<u8> kerv(static_cast<size_t>(m) * m);
    int kd = solve_inplace(aug.data(), nrow, m, p, x0.data(), kerv.data());
    if (kd < 0) return;
    int total = ipow(p, kd);
    std::array<u8, kMaxM> u{};
    for (int tt = 0; tt < total && !done_; ++tt) {
      u = x0;
      int x = tt;
      for (int j = kd - 1; j >= 0; --j) {
        int coef = x % p;
        x /= p;
        if (!coef) continue;
        for (int q = 0; q < m; ++q) u[q] = static_cast<u8>((u[q] + coef * kerv[static_cast<size_t>(j) * m + q]) % p);
      }
      int code = encode(u.data(), m, p);
      if (code == 0) continue;
      tryCandidate(code);
    }
  }

  int npairs() const { return m_ * (m_ - 1) / 2 + 1; }

  void leaf() {
    if (mode_ == Mode::Count) {
      if (++count_ > limit_)
        throw Error(ErrorCode::LimitExceeded, "stabilizer has more than " + std::to_string(limit_) + " elements");
      return;
    }
    Mat Pp(p_, m_, m_);
    std::array<u8, kMaxM> u{};
    for (int a = 0; a < m_; ++a) {
      decode(rows_[a], p_, m_, u.data());
      for (int j = 0; j < m_; ++j) Pp.at(a, j) = u[j];
    }
    Mat P = invert(Q_) * Pp;
    if (transform(V_, P) != W_)
      throw Error(ErrorCode::InvalidInput, "internal error: congruence witness failed verification");
    witness_ = P;
    done_ = true;
  }

  const SkewSubspace& V_;
  const SkewSubspace& W_;
  SearchOptions opt_;
  SpaceData sv_, sw_;
  int p_ = 3, m_ = 0, d_ = 0;
  std::vector<int> idV_, idW_;
  std::vector<std::vector<int>> candByID_;
  std::vector<std::uint64_t> classSizeW_;
  Mat Q_;
  std::vector<u8> Yp_;
  std::vector<int> target_;
  std::vector<Level> levels_;
  // DFS state
  std::vector<int> rows_;
  std::vector<u8> rvals_;
  std::vector<std::vector<u8>> ech_;
  std::vector<std::vector<int>> echPiv_;
  Mode mode_ = Mode::Find;
  bool done_ = false;
  std::optional<Mat> witness_;
  std::uint64_t count_ = 0, limit_ = 0, nodes_ = 0;
};

}  // namespace

std::optional<Mat> congruent_search(const SkewSubspace& V, const SkewSubspace& W, const SearchOptions& opt,
                                    SearchStats* stats) {
  if (V.p != W.p || V.m != W.m || V.d != W.d) return std::nullopt;
  if (V == W) return Mat::identity(V.p, V.m);
  if (V.d == 0 || V.d == V.ambient_dim()) return Mat::identity(V.p, V.m);
  if (opt.prefilter && invariant_fingerprint(V) != invariant_fingerprint(W)) return std::nullopt;
  CongruenceSearch s(V, W, opt);
  if (!s.prepare()) return std::nullopt;
  auto r = s.find_one();
  if (stats) stats->nodes += s.nodes();
  return r;
}

bool congruent(const SkewSubspace& V, const SkewSubspace& W, const SearchOptions& opt) {
  return congruent_search(V, W, opt).has_value();
}

BigInt stabilizer_enumerate(const SkewSubspace& V, std::uint64_t limit, const SearchOptions& opt) {
  if (V.d == 0 || V.d == V.ambient_dim()) {
    BigInt g = gl_order(V.p, V.m);
    if (g > limit)
      throw Error(ErrorCode::LimitExceeded, "stabilizer is all of GL_m, order " + g.str());
    return g;
  }
  CongruenceSearch s(V, V, opt);
  s.prepare();
  return BigInt(s.count_all(limit));
}

// ---------------------------------------------------------------------------
// Orbit oracle

std::vector<OrbitRecord> orbit_partition_exhaustive(int p, int m, int d, std::uint64_t budget) {
  return orbit_labeling_exhaustive(p, m, d, budget).orbits;
}

OrbitLabeling orbit_labeling_exhaustive(int p, int m, int d, std::uint64_t budget) {
  const int D = skew_dim(m);
  // Keys pack the d x D RREF digits, most significant first.
  const double bits = static_cast<double>(d) * D * std::log2(static_cast<double>(p));
  if (bits >= 63.0)
    throw Error(ErrorCode::BudgetExceeded, "orbit oracle key for Gr(" + std::to_string(d) + ", AS_" +
                                               std::to_string(m) + ") does not fit in 64 bits");
  std::vector<std::uint64_t> keys;
  auto pack = [&](const Mat& B) {
    std::uint64_t k = 0;
    for (u8 x : B.e) k = k * p + x;
    return k;
  };
  enumerate_subspaces(p, m, d, [&](const Mat& B) { keys.push_back(pack(B)); }, budget);
  std::sort(keys.begin(), keys.end());
  auto unpack = [&](std::uint64_t k) {
    Mat B(p, d, D);
    for (int t = d * D - 1; t >= 0; --t) {
      B.e[t] = static_cast<u8>(k % p);
      k /= p;
    }
    return B;
  };

  std::vector<Mat> gens;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) gens.push_back(ElementaryMove{ElementaryMove::Shear, i, j, 1}.matrix(p, m));
  if (m >= 1) gens.push_back(ElementaryMove{ElementaryMove::Scale, 0, 0, primitive_root(p)}.matrix(p, m));
  if (m >= 2) gens.push_back(ElementaryMove{ElementaryMove::Swap, 0, 1, 1}.matrix(p, m));
  std::vector<Mat> acts;
  for (auto& g : gens) acts.push_back(congruence_action_matrix(g));

  std::vector<char> seen(keys.size(), 0);
  OrbitLabeling res;
  res.label.assign(keys.size(), -1);
  std::vector<OrbitRecord>& out = res.orbits;
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < keys.size(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    queue.assign(1, s);
    std::uint64_t size = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      ++size;
      res.label[queue[h]] = static_cast<int>(out.size());
      Mat B = unpack(keys[queue[h]]);
      for (auto& A : acts) {
        Mat img = d ? row_space(B * A) : B;
        std::uint64_t k = pack(img);
        auto it = std::lower_bound(keys.begin(), keys.end(), k);
        std::size_t idx = static_cast<std::size_t>(it - keys.begin());
        if (!seen[idx]) {
          seen[idx] = 1;
          queue.push_back(idx);
        }
      }
    }
    OrbitRecord r;
    r.representative.p = p;
    r.representative.m = m;
    r.representative.d = d;
    r.representative.basis = unpack(keys[s]);
    r.orbitSize = size;
    out.push_back(std::move(r));
  }
  res.members.reserve(keys.size());
  for (auto k : keys) {
    SkewSubspace V;
    V.p = p;
    V.m = m;
    V.d = d;
    V.basis = unpack(k);
    res.members.push_back(std::move(V));
  }
  return res;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json subspace_to_json(const SkewSubspace& V) {
  nlohmann::json forms = nlohmann::json::array();
  for (const auto& X : V.forms()) forms.push_back(mat_to_json(X));
  return {{"p", V.p}, {"m", V.m}, {"d", V.d}, {"basis_forms", forms}};
}

SkewSubspace subspace_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("basis_forms") || !j.contains("m"))
    throw Error(ErrorCode::InvalidInput, "subspace JSON needs \"m\" and \"basis_forms\"");
  int p = j.value("p", 3), m = j.at("m").get<int>();
  std::vector<SkewForm> forms;
  for (const auto& f : j.at("basis_forms")) {
    nlohmann::json g = f;
    if (!g.contains("p")) g["p"] = p;
    Mat X = mat_from_json(g);
    if (X.rows != m || X.cols != m) throw Error(ErrorCode::InvalidInput, "basis form is not m x m");
    forms.push_back(X);
  }
  SkewSubspace V = forms.empty() ? zero_subspace(p, m) : canonical_basis(p, m, forms);
  if (j.contains("d") && j.at("d").get<int>() != V.d)
    throw Error(ErrorCode::InvalidInput, "declared d = " + std::to_string(j.at("d").get<int>()) +
                                             " but the forms span dimension " + std::to_string(V.d));
  return V;
}

nlohmann::json fingerprint_to_json(const Fingerprint& f) {
  auto prof = [](const auto& pr) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [v, c] : pr) a.push_back({v, c});
    return a;
  };
  nlohmann::json j = {{"radicalDim", f.radicalDim},
                      {"rankMultiset", prof(f.rankMultiset)},
                      {"lineperpProfile", prof(f.lineperpProfile)},
                      {"lineSignatureProfile", prof(f.lineSignatureProfile)}};
  if (!f.planePerpProfile.empty()) j["planePerpProfile"] = prof(f.planePerpProfile);
  if (f.pfZeroCount >= 0) j["pfZeroCount"] = f.pfZeroCount;
  return j;
}

}  // namespace pga
