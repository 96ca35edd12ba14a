#pragma once

// Dense linear algebra over the prime field Z_p (p odd, p <= 251).
// Entries are stored as reduced residues in unsigned bytes, row-major.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pga/error.hpp"

namespace pga {

using u8 = std::uint8_t;
using Vec = std::vector<u8>;

// Small helpers for scalar arithmetic mod p.
inline int modp(long long v, int p) {
  long long r = v % p;
  return static_cast<int>(r < 0 ? r + p : r);
}
int inv_mod(int a, int p);
bool is_odd_prime(int p);
int primitive_root(int p);

struct Mat {
  int p = 3;
  int rows = 0;
  int cols = 0;
  std::vector<u8> e;

  Mat() = default;
  Mat(int p_, int r, int c) : p(p_), rows(r), cols(c), e(static_cast<size_t>(r) * c, 0) {}

  static Mat identity(int p, int n);
  static Mat zero(int p, int r, int c) { return Mat(p, r, c); }
  // Builds from signed integers, reducing mod p.
  static Mat from_rows(int p, const std::vector<std::vector<int>>& rows);

  u8& at(int i, int j) { return e[static_cast<size_t>(i) * cols + j]; }
  u8 at(int i, int j) const { return e[static_cast<size_t>(i) * cols + j]; }
  u8* row(int i) { return e.data() + static_cast<size_t>(i) * cols; }
  const u8* row(int i) const { return e.data() + static_cast<size_t>(i) * cols; }
  Vec row_vec(int i) const { return Vec(row(i), row(i) + cols); }
  Vec col_vec(int j) const;

  bool is_square() const { return rows == cols; }
  bool is_zero() const;
  bool operator==(const Mat& o) const {
    return p == o.p && rows == o.rows && cols == o.cols && e == o.e;
  }
  bool operator!=(const Mat& o) const { return !(*this == o); }
  bool operator<(const Mat& o) const;

  Mat transpose() const;
  Mat operator*(const Mat& o) const;
  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  Mat operator-() const;
  Mat scaled(int s) const;
  Vec apply(const Vec& v) const;  // M v (column convention)
  Mat pow(long long k) const;
  Mat submatrix(int r0, int c0, int nr, int nc) const;
  void set_block(int r0, int c0, const Mat& b);
  std::string to_string() const;
};

struct RrefResult {
  Mat R;
  int rank = 0;
  std::vector<int> pivots;
};

// Leftmost pivot column, topmost available row; pivots scaled to 1 and
// cleared above and below. Deterministic.
RrefResult rref_rank(const Mat& M);
int rank(const Mat& M);
// Nonzero rows of the RREF (a canonical basis for the row space).
Mat row_space(const Mat& M);
int det(const Mat& M);
Mat invert(const Mat& M);  // throws Singular

struct AffineSolution {
  std::optional<Vec> particular;  // none if A x = b is inconsistent
  std::vector<Vec> kernel;        // basis of {x : A x = 0}
};
AffineSolution solve_affine(const Mat& A, const Vec& b);
// Basis of the left null space {y : y A = 0}.
std::vector<Vec> left_kernel(const Mat& A);
std::vector<Vec> kernel(const Mat& A);

// T_{m',n'}: M viewed as a block matrix with blocks of size
// (blockRows x blockCols); the block grid is transposed, blocks unchanged.
Mat block_transpose(const Mat& M, int blockRows, int blockCols);

Mat stack_rows(const std::vector<Vec>& rows, int p, int cols);
Mat vstack(const Mat& a, const Mat& b);
Mat hstack(const Mat& a, const Mat& b);
Mat block_diag(const Mat& a, const Mat& b);

// JSON: {"p":p,"rows":r,"cols":c,"entries":[[...],...]}
nlohmann::json mat_to_json(const Mat& M);
Mat mat_from_json(const nlohmann::json& j);

// Uniform random matrix from a 64-bit generator state.
template <class Rng>
Mat random_mat(int p, int r, int c, Rng& rng) {
  Mat M(p, r, c);
  for (auto& x : M.e) x = static_cast<u8>(rng() % static_cast<unsigned>(p));
  return M;
}
template <class Rng>
Mat random_invertible(int p, int n, Rng& rng) {
  for (;;) {
    Mat M = random_mat(p, n, n, rng);
    if (rank(M) == n) return M;
  }
}

}  // namespace pga
