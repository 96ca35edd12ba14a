#include "pga/skewform.hpp"

#include <string>

namespace pga {

void validate_skew(const Mat& X) {
  if (!X.is_square())
    throw Error(ErrorCode::InvalidInput,
                "skew form must be square, got " + std::to_string(X.rows) + "x" + std::to_string(X.cols));
  for (int i = 0; i < X.rows; ++i)
    for (int j = i; j < X.cols; ++j)
      if (modp(X.at(i, j) + X.at(j, i), X.p) != 0)
        throw Error(ErrorCode::InvalidInput, "not anti-symmetric at entry (" + std::to_string(i + 1) + "," +
                                                 std::to_string(j + 1) + "): x_ij=" + std::to_string(X.at(i, j)) +
                                                 ", x_ji=" + std::to_string(X.at(j, i)));
}

bool is_skew(const Mat& X) {
  try {
    validate_skew(X);
    return true;
  } catch (const Error&) {
    return false;
  }
}

SkewForm skew_from_upper(int p, int m, const std::vector<UpperEntry>& entries) {
  SkewForm X(p, m, m);
  for (const auto& t : entries) {
    if (t.i < 1 || t.j > m || t.i >= t.j) throw Error(ErrorCode::InvalidInput, "upper entry index out of range");
    int v = modp(t.v, p);
    X.at(t.i - 1, t.j - 1) = static_cast<u8>(modp(X.at(t.i - 1, t.j - 1) + v, p));
    X.at(t.j - 1, t.i - 1) = static_cast<u8>(modp(-X.at(t.i - 1, t.j - 1), p));
  }
  return X;
}

int skew_coord(int m, int i, int j) { return i * m - i * (i + 1) / 2 + (j - i - 1); }

Vec skew_to_vec(const SkewForm& X) {
  const int m = X.rows;
  Vec v;
  v.reserve(skew_dim(m));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) v.push_back(X.at(i, j));
  return v;
}

SkewForm skew_from_vec(int p, int m, const Vec& v) {
  SkewForm X(p, m, m);
  int t = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j, ++t) {
      X.at(i, j) = v[t];
      X.at(j, i) = static_cast<u8>((p - v[t]) % p);
    }
  return X;
}

Mat ElementaryMove::matrix(int p, int m) const {
  Mat E = Mat::identity(p, m);
  switch (kind) {
    case Swap:
      E.at(i, i) = 0;
      E.at(j, j) = 0;
      E.at(i, j) = 1;
      E.at(j, i) = 1;
      break;
    case Scale:
      if (modp(lambda, p) == 0) throw Error(ErrorCode::InvalidInput, "scale move needs nonzero lambda");
      E.at(i, i) = static_cast<u8>(modp(lambda, p));
      break;
    case Shear:
      E.at(i, j) = static_cast<u8>(modp(E.at(i, j) + lambda, p));
      break;
  }
  return E;
}

int pfaffian4(const SkewForm& X) {
  if (X.rows != 4 || X.cols != 4)
    throw Error(ErrorCode::WrongDimension, "pfaffian4 needs m = 4, got m = " + std::to_string(X.rows));
  const int p = X.p;
  long long v = X.at(0, 1) * X.at(2, 3) - X.at(0, 2) * X.at(1, 3) + X.at(0, 3) * X.at(1, 2);
  return modp(v, p);
}

std::vector<int> principal_pfaffians(const SkewForm& X) {
  if (X.rows != 5 || X.cols != 5)
    throw Error(ErrorCode::WrongDimension, "principal_pfaffians needs m = 5, got m = " + std::to_string(X.rows));
  std::vector<int> out;
  for (int del = 0; del < 5; ++del) {
    SkewForm Y(X.p, 4, 4);
    for (int a = 0, ia = 0; a < 5; ++a) {
      if (a == del) continue;
      for (int b = 0, ib = 0; b < 5; ++b) {
        if (b == del) continue;
        Y.at(ia, ib) = X.at(a, b);
        ++ib;
      }
      ++ia;
    }
    out.push_back(pfaffian4(Y));
  }
  return out;
}

int skew_rank(const SkewForm& X) { return rank(X); }

Mat radical(const SkewForm& X) {
  // v X = 0  <=>  X^T v^T = 0  <=>  X v^T = 0 since X^T = -X.
  auto ker = kernel(X);
  return row_space(stack_rows(ker, X.p, X.rows));
}

SkewForm congruent(const Mat& P, const SkewForm& X) { return P * X * P.transpose(); }

SkewForm skew_normal_form(int p, int m, int k) {
  SkewForm X(p, m, m);
  for (int t = 0; t < k; ++t) {
    X.at(2 * t, 2 * t + 1) = 1;
    X.at(2 * t + 1, 2 * t) = static_cast<u8>(p - 1);
  }
  return X;
}

namespace {

// X <- E X E^T and P <- E P for the row operation row_a += f * row_b.
void shear(Mat& X, Mat& P, int a, int b, int f) {
  const int p = X.p, m = X.rows;
  if (!f) return;
  for (int j = 0; j < m; ++j) X.at(a, j) = static_cast<u8>((X.at(a, j) + f * X.at(b, j)) % p);
  for (int i = 0; i < m; ++i) X.at(i, a) = static_cast<u8>((X.at(i, a) + f * X.at(i, b)) % p);
  for (int j = 0; j < m; ++j) P.at(a, j) = static_cast<u8>((P.at(a, j) + f * P.at(b, j)) % p);
}

void swap_idx(Mat& X, Mat& P, int a, int b) {
  if (a == b) return;
  const int m = X.rows;
  for (int j = 0; j < m; ++j) std::swap(X.at(a, j), X.at(b, j));
  for (int i = 0; i < m; ++i) std::swap(X.at(i, a), X.at(i, b));
  for (int j = 0; j < m; ++j) std::swap(P.at(a, j), P.at(b, j));
}

void scale(Mat& X, Mat& P, int a, int f) {
  const int p = X.p, m = X.rows;
  for (int j = 0; j < m; ++j) X.at(a, j) = static_cast<u8>(X.at(a, j) * f % p);
  for (int i = 0; i < m; ++i) X.at(i, a) = static_cast<u8>(X.at(i, a) * f % p);
  for (int j = 0; j < m; ++j) P.at(a, j) = static_cast<u8>(P.at(a, j) * f % p);
}

}  // namespace

SkewNormal skew_normalize(const SkewForm& X0) {
  validate_skew(X0);
  const int p = X0.p, m = X0.rows;
  Mat X = X0;
  Mat P = Mat::identity(p, m);
  int k = 0;
  for (int s = 0; s + 1 < m; s += 2) {
    // First nonzero entry (i, j), i < j, in the untouched trailing block.
    int fi = -1, fj = -1;
    for (int i = s; i < m && fi < 0; ++i)
      for (int j = i + 1; j < m; ++j)
        if (X.at(i, j)) {
          fi = i;
          fj = j;
          break;
        }
    if (fi < 0) break;
    swap_idx(X, P, s, fi);
    swap_idx(X, P, s + 1, fj);
    scale(X, P, s, inv_mod(X.at(s, s + 1), p));
    // Clear the remaining entries in rows/columns s and s+1.
    for (int t = s + 2; t < m; ++t) {
      int a = X.at(t, s + 1);  // row t gets -a * row s
      int b = X.at(t, s);      // row t gets +b * row s+1
      shear(X, P, t, s, modp(-a, p));
      shear(X, P, t, s + 1, b);
    }
    ++k;
  }
  return {P, k};
}

Mat perp(const Mat& U, const std::vector<SkewForm>& V, int m) {
  const int p = V.empty() ? U.p : V[0].p;
  std::vector<Vec> cons;
  for (int r = 0; r < U.rows; ++r) {
    Mat u = U.submatrix(r, 0, 1, m);
    for (const auto& X : V) {
      Mat ux = u * X;
      cons.push_back(ux.row_vec(0));
    }
  }
  Mat C = stack_rows(cons, p, m);
  auto ker = kernel(C);
  return row_space(stack_rows(ker, p, m));
}

Mat perp_vec(const Vec& u, const std::vector<SkewForm>& V) {
  const int m = static_cast<int>(u.size());
  Mat U = stack_rows({u}, V.empty() ? 3 : V[0].p, m);
  return perp(U, V, m);
}

}  // namespace pga
