#pragma once

// Random extension data for property tests. Modules come from two commuting
// families (polynomials in one nilpotent, and square-zero products), and the
// cochains are sampled from linear solution spaces so that both cocycle and
// exponent verdicts occur.

#include <random>
#include <vector>

#include "pga/extdata.hpp"

namespace corpus {

using namespace pga;

inline Mat rand_mat(int p, int r, int c, std::mt19937_64& rng) { return random_mat(p, r, c, rng); }

// Nilpotent J with J^p = 0: lower shift on Jordan blocks of size <= p.
inline Mat block_shift(int p, int n, std::mt19937_64& rng) {
  Mat J(p, n, n);
  int start = 0;
  while (start < n) {
    int size = 1 + static_cast<int>(rng() % std::min(p, n - start));
    for (int i = 1; i < size; ++i) J.at(start + i, start + i - 1) = 1;
    start += size;
  }
  return J;
}

// Commuting unipotent Gamma's with Gamma^p = I.
//   kind 0: identity (trivial action)
//   kind 1: Gamma_r = I + f_r(J) for polynomials f_r without constant term
//   kind 2: Gamma_r = I + N_r with all N_r N_s = 0
inline std::vector<Mat> random_module(int p, int m, int n, int kind, std::mt19937_64& rng) {
  std::vector<Mat> G(m, Mat::identity(p, n));
  if (kind == 0 || n == 0) return G;
  Mat S = random_invertible(p, n, rng), Si = invert(S);
  if (kind == 1) {
    Mat J = block_shift(p, n, rng);
    for (int r = 0; r < m; ++r) {
      Mat X(p, n, n), P = J;
      for (int k = 1; k < n; ++k) {
        X = X + P.scaled(static_cast<int>(rng() % p));
        P = P * J;
      }
      G[r] = S * (Mat::identity(p, n) + X) * Si;
    }
  } else {
    int u = 1 + static_cast<int>(rng() % std::max(1, n - 1));
    if (u >= n) u = n - 1;
    for (int r = 0; r < m; ++r) {
      Mat N(p, n, n);
      if (u > 0) N.set_block(n - u, 0, rand_mat(p, u, n - u, rng));
      G[r] = S * (Mat::identity(p, n) + N) * Si;
    }
  }
  return G;
}

// Unknown coordinates of a cochain: phi_rr (r) and phi_rs (r < s), n each.
inline std::vector<std::pair<int, int>> cochain_slots(int m) {
  std::vector<std::pair<int, int>> s;
  for (int r = 0; r < m; ++r)
    for (int t = r; t < m; ++t) s.push_back({r, t});
  return s;
}

inline void set_skew(ExtDatum& D, int r, int s, const Vec& v) {
  D.set_phi(r, s, v);
  if (r != s) {
    Vec w(v.size());
    for (size_t i = 0; i < v.size(); ++i) w[i] = static_cast<pga::u8>((D.p - v[i]) % D.p);
    D.set_phi(s, r, w);
  }
}

// Residual vectors of linear conditions on the cochain (independently
// re-derived here to sample solution spaces).
enum Cond : unsigned { Cocycle = 1, DiagZero = 2, Annihilated = 4 };

inline Vec residual(const ExtDatum& D, unsigned conds) {
  const int p = D.p, m = D.m, n = D.n;
  std::vector<Mat> T, N;
  for (const auto& G : D.gammas) {
    T.push_back(G - Mat::identity(p, n));
    Mat S(p, n, n), P = Mat::identity(p, n);
    for (int k = 0; k < p; ++k) {
      S = S + P;
      P = P * G;
    }
    N.push_back(S);
  }
  Vec out;
  auto push = [&](const Vec& v) { out.insert(out.end(), v.begin(), v.end()); };
  auto lin = [&](std::initializer_list<std::pair<const Mat*, Vec>> terms, std::initializer_list<int> signs) {
    Vec acc(n, 0);
    auto sg = signs.begin();
    for (const auto& [M, v] : terms) {
      Vec w = M->apply(v);
      for (int i = 0; i < n; ++i) acc[i] = static_cast<pga::u8>(modp(acc[i] + *sg * w[i], p));
      ++sg;
    }
    return acc;
  };
  if (conds & Cocycle) {
    for (int r = 0; r < m; ++r) push(T[r].apply(D.phi(r, r)));
    for (int r = 0; r < m; ++r)
      for (int s = r + 1; s < m; ++s) {
        push(lin({{&N[r], D.phi(r, s)}, {&T[s], D.phi(r, r)}}, {1, 1}));
        push(lin({{&T[r], D.phi(s, s)}, {&N[s], D.phi(r, s)}}, {1, -1}));
        for (int t = s + 1; t < m; ++t)
          push(lin({{&T[r], D.phi(s, t)}, {&T[s], D.phi(r, t)}, {&T[t], D.phi(r, s)}}, {1, -1, 1}));
      }
  }
  if (conds & DiagZero)
    for (int r = 0; r < m; ++r) push(D.phi(r, r));
  if (conds & Annihilated)
    for (int r = 0; r < m; ++r)
      for (int s = 0; s < m; ++s)
        for (int t = s + 1; t < m; ++t) push(T[r].apply(D.phi(s, t)));
  return out;
}

// Random cochain in the kernel of the chosen conditions (conds = 0: uniform).
inline ExtDatum random_cochain(ExtDatum D, unsigned conds, std::mt19937_64& rng) {
  const int p = D.p, n = D.n;
  auto slots = cochain_slots(D.m);
  const int unknowns = static_cast<int>(slots.size()) * n;
  auto with = [&](const Vec& x) {
    ExtDatum E = D;
    E.phis.assign(n, Mat(p, D.m, D.m));
    for (size_t k = 0; k < slots.size(); ++k) {
      Vec v(x.begin() + k * n, x.begin() + (k + 1) * n);
      set_skew(E, slots[k].first, slots[k].second, v);
    }
    return E;
  };
  if (conds == 0 || unknowns == 0) {
    Vec x(unknowns);
    for (auto& v : x) v = static_cast<pga::u8>(rng() % p);
    return with(x);
  }
  ExtDatum Z = with(Vec(unknowns, 0));
  const int rows = static_cast<int>(residual(Z, conds).size());
  Mat M(p, rows, unknowns);
  for (int c = 0; c < unknowns; ++c) {
    Vec x(unknowns, 0);
    x[c] = 1;
    Vec col = residual(with(x), conds);
    for (int r = 0; r < rows; ++r) M.at(r, c) = col[r];
  }
  Vec x(unknowns, 0);
  for (const auto& b : kernel(M)) {
    int c = static_cast<int>(rng() % p);
    for (int i = 0; i < unknowns; ++i) x[i] = static_cast<pga::u8>((x[i] + c * b[i]) % p);
  }
  return with(x);
}

struct Entry {
  ExtDatum D;
  bool isCocycle;  // sampled from the cocycle solution space
};

// Corpus of data with p^m <= 27 and p^{m+n} <= 3^7 (p = 3) or 5^4 (p = 5).
inline std::vector<Entry> make_corpus(std::uint64_t seed, int perShape = 4) {
  std::mt19937_64 rng(seed);
  std::vector<Entry> out;
  struct Shape {
    int p, m, n;
  };
  const std::vector<Shape> shapes = {{3, 1, 1}, {3, 1, 3}, {3, 2, 1}, {3, 2, 2}, {3, 2, 3}, {3, 2, 4},
                                     {3, 3, 1}, {3, 3, 2}, {3, 3, 3}, {3, 3, 4}, {5, 1, 2}, {5, 2, 1},
                                     {5, 2, 2}, {5, 1, 3}};
  for (const auto& sh : shapes)
    for (int kind = 0; kind < 3; ++kind)
      for (int t = 0; t < perShape; ++t) {
        ExtDatum D = ExtDatum::trivial(sh.p, sh.m, sh.n);
        D.gammas = random_module(sh.p, sh.m, sh.n, kind, rng);
        const unsigned mode = static_cast<unsigned>(t % 4);
        switch (mode) {
          case 0: out.push_back({random_cochain(D, Cocycle, rng), true}); break;
          case 1: out.push_back({random_cochain(D, Cocycle | DiagZero, rng), true}); break;
          case 2: out.push_back({random_cochain(D, Cocycle | DiagZero | Annihilated, rng), true}); break;
          default: out.push_back({random_cochain(D, 0, rng), false}); break;
        }
      }
  return out;
}

}  // namespace corpus
