#pragma once

// Anti-symmetric matrices over Z_p and their congruence invariants.
// A SkewForm is an ordinary Mat that satisfies X^T = -X.

#include <vector>

#include "pga/fieldcore.hpp"

namespace pga {

using SkewForm = Mat;

// Throws InvalidInput naming the first offending entry when X is not
// square or not anti-symmetric.
void validate_skew(const Mat& X);
bool is_skew(const Mat& X);

// Builds an m x m skew form from its strictly-upper entries given as
// {i, j, value} triples with 1-based i < j.
struct UpperEntry {
  int i, j, v;
};
SkewForm skew_from_upper(int p, int m, const std::vector<UpperEntry>& entries);

// Coordinates in the fixed order x12, x13, ..., x1m, x23, ..., x(m-1)m.
inline int skew_dim(int m) { return m * (m - 1) / 2; }
Vec skew_to_vec(const SkewForm& X);
SkewForm skew_from_vec(int p, int m, const Vec& v);
// Index of coordinate x_{ij} (0-based i < j).
int skew_coord(int m, int i, int j);

struct ElementaryMove {
  enum Kind { Swap, Scale, Shear } kind;
  int i = 0, j = 0;  // 0-based
  int lambda = 1;
  // P_ij, D_i(lambda), T_ij(lambda) = I + lambda E_ij.
  Mat matrix(int p, int m) const;
};

int pfaffian4(const SkewForm& X);                       // WrongDimension unless m = 4
std::vector<int> principal_pfaffians(const SkewForm& X);  // WrongDimension unless m = 5
int skew_rank(const SkewForm& X);

// Row basis (RREF) of {v : v X = 0}.
Mat radical(const SkewForm& X);

struct SkewNormal {
  Mat P;      // invertible, P X P^T = diag(J,...,J,0,...,0)
  int k = 0;  // number of J blocks
};
SkewNormal skew_normalize(const SkewForm& X);
SkewForm skew_normal_form(int p, int m, int k);

// Row basis (RREF) of the common orthogonal complement
// {v : u X v^T = 0 for all u in U, X in V}. U is given by rows.
Mat perp(const Mat& U, const std::vector<SkewForm>& V, int m);
Mat perp_vec(const Vec& u, const std::vector<SkewForm>& V);

// P X P^T
SkewForm congruent(const Mat& P, const SkewForm& X);

}  // namespace pga
