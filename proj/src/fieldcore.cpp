#include "pga/fieldcore.hpp"

#include <algorithm>
#include <sstream>

namespace pga {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BadBlockShape: return "BadBlockShape";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
    case ErrorCode::DependentPair: return "DependentPair";
    case ErrorCode::TypeTooLarge: return "TypeTooLarge";
    case ErrorCode::SingularTransition: return "SingularTransition";
    case ErrorCode::GammaMismatch: return "GammaMismatch";
    case ErrorCode::NontrivialAction: return "NontrivialAction";
    case ErrorCode::MissingCatalog: return "MissingCatalog";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

int inv_mod(int a, int p) {
  a = modp(a, p);
  if (a == 0) throw Error(ErrorCode::Singular, "zero has no inverse mod p");
  // Extended Euclid.
  int t = 0, nt = 1, r = p, nr = a;
  while (nr != 0) {
    int q = r / nr;
    int tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  return modp(t, p);
}

bool is_odd_prime(int p) {
  if (p < 3 || p % 2 == 0) return false;
  for (int d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

int primitive_root(int p) {
  for (int g = 2; g < p; ++g) {
    int x = 1, ord = 0;
    do {
      x = x * g % p;
      ++ord;
    } while (x != 1);
    if (ord == p - 1) return g;
  }
  return 1;
}

Mat Mat::identity(int p, int n) {
  Mat I(p, n, n);
  for (int i = 0; i < n; ++i) I.at(i, i) = 1;
  return I;
}

Mat Mat::from_rows(int p, const std::vector<std::vector<int>>& rs) {
  int r = static_cast<int>(rs.size());
  int c = r ? static_cast<int>(rs[0].size()) : 0;
  Mat M(p, r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rs[i].size()) != c) throw Error(ErrorCode::InvalidInput, "ragged matrix rows");
    for (int j = 0; j < c; ++j) M.at(i, j) = static_cast<u8>(modp(rs[i][j], p));
  }
  return M;
}

Vec Mat::col_vec(int j) const {
  Vec v(rows);
  for (int i = 0; i < rows; ++i) v[i] = at(i, j);
  return v;
}

bool Mat::is_zero() const {
  return std::all_of(e.begin(), e.end(), [](u8 x) { return x == 0; });
}

bool Mat::operator<(const Mat& o) const {
  if (rows != o.rows) return rows < o.rows;
  if (cols != o.cols) return cols < o.cols;
  return e < o.e;
}

Mat Mat::transpose() const {
  Mat T(p, cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) T.at(j, i) = at(i, j);
  return T;
}

Mat Mat::operator*(const Mat& o) const {
  if (cols != o.rows) throw Error(ErrorCode::InvalidInput, "matrix product shape mismatch");
  Mat R(p, rows, o.cols);
  std::vector<unsigned> acc(o.cols);
  for (int i = 0; i < rows; ++i) {
    std::fill(acc.begin(), acc.end(), 0u);
    for (int k = 0; k < cols; ++k) {
      unsigned a = at(i, k);
      if (!a) continue;
      const u8* orow = o.row(k);
      for (int j = 0; j < o.cols; ++j) acc[j] += a * orow[j];
      // keep accumulators bounded for large p
      if ((k & 15) == 15)
        for (auto& x : acc) x %= p;
    }
    for (int j = 0; j < o.cols; ++j) R.at(i, j) = static_cast<u8>(acc[j] % p);
  }
  return R;
}

Mat Mat::operator+(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) throw Error(ErrorCode::InvalidInput, "matrix sum shape mismatch");
  Mat R(p, rows, cols);
  for (size_t i = 0; i < e.size(); ++i) R.e[i] = static_cast<u8>((e[i] + o.e[i]) % p);
  return R;
}

Mat Mat::operator-(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) throw Error(ErrorCode::InvalidInput, "matrix difference shape mismatch");
  Mat R(p, rows, cols);
  for (size_t i = 0; i < e.size(); ++i) R.e[i] = static_cast<u8>((e[i] + p - o.e[i]) % p);
  return R;
}

Mat Mat::operator-() const {
  Mat R(p, rows, cols);
  for (size_t i = 0; i < e.size(); ++i) R.e[i] = static_cast<u8>((p - e[i]) % p);
  return R;
}

Mat Mat::scaled(int s) const {
  s = modp(s, p);
  Mat R(p, rows, cols);
  for (size_t i = 0; i < e.size(); ++i) R.e[i] = static_cast<u8>(e[i] * s % p);
  return R;
}

Vec Mat::apply(const Vec& v) const {
  Vec out(rows, 0);
  for (int i = 0; i < rows; ++i) {
    unsigned s = 0;
    for (int j = 0; j < cols; ++j) s += static_cast<unsigned>(at(i, j)) * v[j];
    out[i] = static_cast<u8>(s % p);
  }
  return out;
}

Mat Mat::pow(long long k) const {
  Mat result = identity(p, rows), base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

Mat Mat::submatrix(int r0, int c0, int nr, int nc) const {
  Mat S(p, nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) S.at(i, j) = at(r0 + i, c0 + j);
  return S;
}

void Mat::set_block(int r0, int c0, const Mat& b) {
  for (int i = 0; i < b.rows; ++i)
    for (int j = 0; j < b.cols; ++j) at(r0 + i, c0 + j) = b.at(i, j);
}

std::string Mat::to_string() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows; ++i) {
    os << (i ? ",[" : "[");
    for (int j = 0; j < cols; ++j) os << (j ? "," : "") << int(at(i, j));
    os << "]";
  }
  os << "]";
  return os.str();
}

RrefResult rref_rank(const Mat& M) {
  RrefResult res;
  res.R = M;
  Mat& R = res.R;
  const int p = M.p;
  int r = 0;
  for (int c = 0; c < R.cols && r < R.rows; ++c) {
    int piv = -1;
    for (int i = r; i < R.rows; ++i)
      if (R.at(i, c)) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < R.cols; ++j) std::swap(R.at(piv, j), R.at(r, j));
    int s = inv_mod(R.at(r, c), p);
    if (s != 1)
      for (int j = c; j < R.cols; ++j) R.at(r, j) = static_cast<u8>(R.at(r, j) * s % p);
    for (int i = 0; i < R.rows; ++i) {
      if (i == r) continue;
      int f = R.at(i, c);
      if (!f) continue;
      int nf = p - f;
      for (int j = c; j < R.cols; ++j) R.at(i, j) = static_cast<u8>((R.at(i, j) + nf * R.at(r, j)) % p);
    }
    res.pivots.push_back(c);
    ++r;
  }
  res.rank = r;
  return res;
}

int rank(const Mat& M) { return rref_rank(M).rank; }

Mat row_space(const Mat& M) {
  auto r = rref_rank(M);
  return r.R.submatrix(0, 0, r.rank, M.cols);
}

int det(const Mat& M) {
  if (!M.is_square()) throw Error(ErrorCode::WrongDimension, "determinant of non-square matrix");
  Mat R = M;
  const int p = M.p, n = M.rows;
  long long d = 1;
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int i = c; i < n; ++i)
      if (R.at(i, c)) {
        piv = i;
        break;
      }
    if (piv < 0) return 0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(R.at(piv, j), R.at(c, j));
      d = p - d;
    }
    d = d * R.at(c, c) % p;
    int s = inv_mod(R.at(c, c), p);
    for (int i = c + 1; i < n; ++i) {
      int f = R.at(i, c) * s % p;
      if (!f) continue;
      for (int j = c; j < n; ++j) R.at(i, j) = static_cast<u8>((R.at(i, j) + (p - f) * R.at(c, j)) % p);
    }
  }
  return static_cast<int>(d % p);
}

Mat invert(const Mat& M) {
  if (!M.is_square()) throw Error(ErrorCode::Singular, "non-square matrix has no inverse");
  const int n = M.rows;
  Mat aug = hstack(M, Mat::identity(M.p, n));
  auto r = rref_rank(aug);
  if (r.rank < n || r.pivots[n - 1] != n - 1)
    throw Error(ErrorCode::Singular, "matrix rank below dimension " + std::to_string(n));
  return r.R.submatrix(0, n, n, n);
}

std::vector<Vec> kernel(const Mat& A) {
  auto r = rref_rank(A);
  const int p = A.p;
  std::vector<bool> is_piv(A.cols, false);
  for (int c : r.pivots) is_piv[c] = true;
  std::vector<Vec> ker;
  for (int f = 0; f < A.cols; ++f) {
    if (is_piv[f]) continue;
    Vec v(A.cols, 0);
    v[f] = 1;
    for (int i = 0; i < r.rank; ++i) v[r.pivots[i]] = static_cast<u8>((p - r.R.at(i, f)) % p);
    ker.push_back(std::move(v));
  }
  return ker;
}

std::vector<Vec> left_kernel(const Mat& A) { return kernel(A.transpose()); }

AffineSolution solve_affine(const Mat& A, const Vec& b) {
  if (static_cast<int>(b.size()) != A.rows) throw Error(ErrorCode::InvalidInput, "solve_affine: b length != rows");
  AffineSolution sol;
  Mat aug(A.p, A.rows, A.cols + 1);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, A.cols) = b[i];
  }
  auto r = rref_rank(aug);
  std::vector<bool> is_piv(A.cols, false);
  for (int c : r.pivots) {
    if (c == A.cols) {
      sol.kernel = kernel(A);
      return sol;  // inconsistent
    }
    is_piv[c] = true;
  }
  Vec x(A.cols, 0);
  for (int i = 0; i < r.rank; ++i) x[r.pivots[i]] = r.R.at(i, A.cols);
  sol.particular = std::move(x);
  const int p = A.p;
  for (int f = 0; f < A.cols; ++f) {
    if (is_piv[f]) continue;
    Vec v(A.cols, 0);
    v[f] = 1;
    for (int i = 0; i < r.rank; ++i) v[r.pivots[i]] = static_cast<u8>((p - r.R.at(i, f)) % p);
    sol.kernel.push_back(std::move(v));
  }
  return sol;
}

Mat block_transpose(const Mat& M, int blockRows, int blockCols) {
  if (blockRows <= 0 || blockCols <= 0 || M.rows % blockRows != 0 || M.cols % blockCols != 0)
    throw Error(ErrorCode::BadBlockShape, "matrix " + std::to_string(M.rows) + "x" + std::to_string(M.cols) +
                                              " is not divisible into " + std::to_string(blockRows) + "x" +
                                              std::to_string(blockCols) + " blocks");
  const int br = M.rows / blockRows, bc = M.cols / blockCols;
  Mat R(M.p, bc * blockRows, br * blockCols);
  for (int I = 0; I < br; ++I)
    for (int J = 0; J < bc; ++J)
      for (int i = 0; i < blockRows; ++i)
        for (int j = 0; j < blockCols; ++j)
          R.at(J * blockRows + i, I * blockCols + j) = M.at(I * blockRows + i, J * blockCols + j);
  return R;
}

Mat stack_rows(const std::vector<Vec>& rs, int p, int cols) {
  Mat M(p, static_cast<int>(rs.size()), cols);
  for (size_t i = 0; i < rs.size(); ++i)
    for (int j = 0; j < cols; ++j) M.at(static_cast<int>(i), j) = rs[i][j];
  return M;
}

Mat vstack(const Mat& a, const Mat& b) {
  if (a.rows == 0) return b;
  if (b.rows == 0) return a;
  if (a.cols != b.cols) throw Error(ErrorCode::InvalidInput, "vstack column mismatch");
  Mat R(a.p, a.rows + b.rows, a.cols);
  R.set_block(0, 0, a);
  R.set_block(a.rows, 0, b);
  return R;
}

Mat hstack(const Mat& a, const Mat& b) {
  if (a.rows != b.rows) throw Error(ErrorCode::InvalidInput, "hstack row mismatch");
  Mat R(a.p, a.rows, a.cols + b.cols);
  R.set_block(0, 0, a);
  R.set_block(0, a.cols, b);
  return R;
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat R(a.p, a.rows + b.rows, a.cols + b.cols);
  R.set_block(0, 0, a);
  R.set_block(a.rows, a.cols, b);
  return R;
}

nlohmann::json mat_to_json(const Mat& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < M.rows; ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (int j = 0; j < M.cols; ++j) r.push_back(int(M.at(i, j)));
    rows.push_back(r);
  }
  return {{"p", M.p}, {"rows", M.rows}, {"cols", M.cols}, {"entries", rows}};
}

Mat mat_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("entries"))
    throw Error(ErrorCode::InvalidInput, "matrix JSON must be an object with \"entries\"");
  int p = j.value("p", 3);
  if (!is_odd_prime(p) || p > 251) throw Error(ErrorCode::InvalidInput, "p must be an odd prime <= 251");
  const auto& ent = j.at("entries");
  int r = j.value("rows", static_cast<int>(ent.size()));
  int c = j.value("cols", ent.empty() ? 0 : static_cast<int>(ent[0].size()));
  if (static_cast<int>(ent.size()) != r) throw Error(ErrorCode::InvalidInput, "entries row count != rows");
  Mat M(p, r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(ent[i].size()) != c) throw Error(ErrorCode::InvalidInput, "entries column count != cols");
    for (int k = 0; k < c; ++k) {
      int v = ent[i][k].get<int>();
      if (v < 0 || v >= p)
        throw Error(ErrorCode::InvalidInput, "entry (" + std::to_string(i) + "," + std::to_string(k) +
                                                 ") out of range [0,p)");
      M.at(i, k) = static_cast<u8>(v);
    }
  }
  return M;
}

}  // namespace pga
