#pragma once

// Allocation-free elimination kernels on small row-major byte arrays. These
// back the hot loops of the fingerprint and congruence search code; the
// public Mat API in fieldcore is used everywhere else.

#include <algorithm>
#include <array>
#include <cstdint>

#include "pga/fieldcore.hpp"

namespace pga {

inline int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

inline int inv_small(int a, int p) {
  static const auto table = [] {
    std::array<std::array<u8, 256>, 256> t{};
    for (int q = 3; q < 256; q += 2)
      if (is_odd_prime(q))
        for (int x = 1; x < q; ++x) t[q][x] = static_cast<u8>(inv_mod(x, q));
    return t;
  }();
  return table[p][a];
}

inline int encode(const u8* v, int n, int p) {
  int c = 0;
  for (int j = 0; j < n; ++j) c = c * p + v[j];
  return c;
}

inline void decode(int code, int p, int n, u8* out) {
  for (int j = n - 1; j >= 0; --j) {
    out[j] = static_cast<u8>(code % p);
    code /= p;
  }
}

// Full reduced row-echelon form in place; returns the rank. Nonzero rows
// come first.
inline int rref_inplace(u8* a, int r, int c, int p, int* pivots = nullptr) {
  int rk = 0;
  for (int col = 0; col < c && rk < r; ++col) {
    int piv = -1;
    for (int i = rk; i < r; ++i)
      if (a[i * c + col]) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != rk) std::swap_ranges(a + piv * c, a + piv * c + c, a + rk * c);
    u8* pr = a + rk * c;
    int s = inv_small(pr[col], p);
    if (s != 1)
      for (int j = col; j < c; ++j) pr[j] = static_cast<u8>(pr[j] * s % p);
    for (int i = 0; i < r; ++i) {
      if (i == rk) continue;
      u8* ri = a + i * c;
      int f = ri[col];
      if (!f) continue;
      int nf = p - f;
      for (int j = col; j < c; ++j) ri[j] = static_cast<u8>((ri[j] + nf * pr[j]) % p);
    }
    if (pivots) pivots[rk] = col;
    ++rk;
  }
  return rk;
}

inline int rank_inplace(u8* a, int r, int c, int p) {
  int rk = 0;
  for (int col = 0; col < c && rk < r; ++col) {
    int piv = -1;
    for (int i = rk; i < r; ++i)
      if (a[i * c + col]) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != rk) std::swap_ranges(a + piv * c, a + piv * c + c, a + rk * c);
    u8* pr = a + rk * c;
    int s = inv_small(pr[col], p);
    for (int i = rk + 1; i < r; ++i) {
      u8* ri = a + i * c;
      int f = ri[col];
      if (!f) continue;
      int nf = p - f * s % p;
      for (int j = col; j < c; ++j) ri[j] = static_cast<u8>((ri[j] + nf * pr[j]) % p);
    }
    ++rk;
  }
  return rk;
}

// Kernel {x : A x = 0} of an r x c matrix (A destroyed). Writes the basis
// rows (length c) to ker, which must hold c*c bytes; returns the dimension.
inline int kernel_inplace(u8* a, int r, int c, int p, u8* ker) {
  int piv[64];
  int rk = rref_inplace(a, r, c, p, piv);
  bool isPiv[64] = {};
  for (int i = 0; i < rk; ++i) isPiv[piv[i]] = true;
  int kd = 0;
  for (int f = 0; f < c; ++f) {
    if (isPiv[f]) continue;
    u8* v = ker + kd * c;
    std::fill(v, v + c, 0);
    v[f] = 1;
    for (int i = 0; i < rk; ++i) v[piv[i]] = static_cast<u8>((p - a[i * c + f]) % p);
    ++kd;
  }
  return kd;
}

// Solves A x = b given the augmented r x (m+1) array. Returns -1 when
// inconsistent; otherwise writes a particular solution x0 (length m) and the
// kernel basis (rows of length m) and returns the kernel dimension.
inline int solve_inplace(u8* aug, int r, int m, int p, u8* x0, u8* ker) {
  const int c = m + 1;
  int piv[64];
  int rk = rref_inplace(aug, r, c, p, piv);
  if (rk > 0 && piv[rk - 1] == m) return -1;
  bool isPiv[64] = {};
  for (int i = 0; i < rk; ++i) isPiv[piv[i]] = true;
  std::fill(x0, x0 + m, 0);
  for (int i = 0; i < rk; ++i) x0[piv[i]] = aug[i * c + m];
  int kd = 0;
  for (int f = 0; f < m; ++f) {
    if (isPiv[f]) continue;
    u8* v = ker + kd * m;
    std::fill(v, v + m, 0);
    v[f] = 1;
    for (int i = 0; i < rk; ++i) v[piv[i]] = static_cast<u8>((p - aug[i * c + f]) % p);
    ++kd;
  }
  return kd;
}

}  // namespace pga
