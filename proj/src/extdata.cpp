#include "pga/extdata.hpp"

#include <functional>

namespace pga {

namespace {

Vec add(const Vec& a, const Vec& b, int p) {
  Vec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = static_cast<u8>((a[i] + b[i]) % p);
  return out;
}

Vec axpy(const Vec& y, int s, const Vec& x, int p) {
  Vec out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = static_cast<u8>(modp(y[i] + s * x[i], p));
  return out;
}

bool is_zero_vec(const Vec& v) {
  for (u8 x : v)
    if (x) return false;
  return true;
}

// (G)_k = 1 + G + ... + G^{k-1}; (G)_0 = 0.
Mat power_sum(const Mat& G, int k) {
  Mat S(G.p, G.rows, G.cols), P = Mat::identity(G.p, G.rows);
  for (int t = 0; t < k; ++t) {
    S = S + P;
    P = P * G;
  }
  return S;
}

std::string idx(std::initializer_list<int> ids) {
  std::string s;
  for (int i : ids) s += (s.empty() ? "" : ",") + std::to_string(i + 1);
  return s;
}

std::vector<Mat> t_ops(const ExtDatum& D) {
  std::vector<Mat> T;
  for (const auto& G : D.gammas) T.push_back(G - Mat::identity(D.p, D.n));
  return T;
}

// Every exponent vector of H.
std::vector<Vec> all_exponents(int p, int m) {
  return all_vectors(p, m, false, true);
}

}  // namespace

Vec ExtDatum::phi(int r, int s) const {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = phis[i].at(r, s);
  return v;
}

void ExtDatum::set_phi(int r, int s, const Vec& v) {
  for (int i = 0; i < n; ++i) phis[i].at(r, s) = v[i];
}

Mat ExtDatum::gamma_of(const Vec& e) const {
  Mat G = Mat::identity(p, n);
  for (int r = 0; r < m; ++r)
    if (e[r]) G = G * gammas[r].pow(e[r]);
  return G;
}

bool ExtDatum::trivial_action() const {
  for (const auto& G : gammas)
    if (G != Mat::identity(p, n)) return false;
  return true;
}

ExtDatum ExtDatum::trivial(int p, int m, int n) {
  ExtDatum D;
  D.p = p;
  D.m = m;
  D.n = n;
  D.gammas.assign(m, Mat::identity(p, n));
  D.phis.assign(n, Mat(p, m, m));
  return D;
}

void validate_datum(const ExtDatum& D) {
  if (!is_odd_prime(D.p)) throw Error(ErrorCode::InvalidInput, "datum: p must be an odd prime");
  if (D.m < 0 || D.n < 0) throw Error(ErrorCode::InvalidInput, "datum: negative rank");
  if (static_cast<int>(D.gammas.size()) != D.m || static_cast<int>(D.phis.size()) != D.n)
    throw Error(ErrorCode::InvalidInput, "datum: expected m gammas and n phis");
  for (int r = 0; r < D.m; ++r) {
    const Mat& G = D.gammas[r];
    if (G.p != D.p || G.rows != D.n || G.cols != D.n)
      throw Error(ErrorCode::InvalidInput, "datum: Gamma^(" + idx({r}) + ") is not n x n");
    if (rank(G) != D.n) throw Error(ErrorCode::InvalidInput, "datum: Gamma^(" + idx({r}) + ") is singular");
    if (G.pow(D.p) != Mat::identity(D.p, D.n))
      throw Error(ErrorCode::InvalidInput, "datum: Gamma^(" + idx({r}) + ")^p != I");
    for (int s = 0; s < r; ++s)
      if (G * D.gammas[s] != D.gammas[s] * G)
        throw Error(ErrorCode::InvalidInput, "datum: Gamma^(" + idx({s}) + ") and Gamma^(" + idx({r}) + ") do not commute");
  }
  for (int i = 0; i < D.n; ++i) {
    const Mat& F = D.phis[i];
    if (F.p != D.p || F.rows != D.m || F.cols != D.m)
      throw Error(ErrorCode::InvalidInput, "datum: Phi^(" + idx({i}) + ") is not m x m");
    for (int r = 0; r < D.m; ++r)
      for (int s = r + 1; s < D.m; ++s)
        if ((F.at(r, s) + F.at(s, r)) % D.p)
          throw Error(ErrorCode::InvalidInput, "datum: Phi^(" + idx({i}) + ") entry (" + idx({r, s}) + ") is not skew");
  }
}

// ---------------------------------------------------------------------------
// The cochain formula.

Vec cocycle_eval(const ExtDatum& D, const Vec& h, const Vec& k) {
  const int p = D.p, m = D.m, n = D.n;
  Vec out(n, 0);
  bool hz = true, kz = true;
  for (int r = 0; r < m; ++r) {
    hz = hz && h[r] == 0;
    kz = kz && k[r] == 0;
  }
  if (hz || kz) return out;
  if (D.trivial_action()) {
    for (int r = 0; r < m; ++r) {
      int carry = (h[r] + k[r]) / p;
      if (carry) out = axpy(out, carry, D.phi(r, r), p);
      for (int s = r + 1; s < m; ++s) {
        int c = k[r] * h[s];
        if (c) out = axpy(out, -c, D.phi(r, s), p);
      }
    }
    return out;
  }
  for (int r = 0; r < m; ++r) {
    // [(i_r + j_r)/p] (h_1^{i_1+j_1} ... h_{r-1}^{i_{r-1}+j_{r-1}}) . phi_rr
    int carry = (h[r] + k[r]) / p;
    if (carry) {
      Vec v = D.phi(r, r);
      for (int t = r - 1; t >= 0; --t)
        if (h[t] + k[t]) v = D.gammas[t].pow(h[t] + k[t]).apply(v);
      out = axpy(out, carry, v, p);
    }
    // - (h_1^{i_1} .. h_{s-1}^{i_{s-1}} h_1^{j_1} .. h_{r-1}^{j_{r-1}} (h_r)_{j_r} (h_s)_{i_s}) . phi_rs
    for (int s = r + 1; s < m; ++s) {
      if (k[r] == 0 || h[s] == 0) continue;
      Vec v = D.phi(r, s);
      if (is_zero_vec(v)) continue;
      v = power_sum(D.gammas[s], h[s]).apply(v);
      v = power_sum(D.gammas[r], k[r]).apply(v);
      for (int t = 0; t < r; ++t)
        if (k[t]) v = D.gammas[t].pow(k[t]).apply(v);
      for (int t = 0; t < s; ++t)
        if (h[t]) v = D.gammas[t].pow(h[t]).apply(v);
      out = axpy(out, -1, v, p);
    }
  }
  return out;
}

CheckReport cocycle_validate(const ExtDatum& D) {
  validate_datum(D);
  CheckReport rep;
  const int p = D.p, m = D.m;
  auto T = t_ops(D);
  std::vector<Mat> N;
  for (const auto& G : D.gammas) N.push_back(power_sum(G, p));
  for (int r = 0; r < m; ++r)
    if (!is_zero_vec(T[r].apply(D.phi(r, r)))) rep.fail("(i) T_r phi_rr != 0 at r=" + idx({r}));
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s) {
      Vec a = add(N[r].apply(D.phi(r, s)), T[s].apply(D.phi(r, r)), p);
      if (!is_zero_vec(a)) rep.fail("(ii) N_r phi_rs + T_s phi_rr != 0 at (r,s)=(" + idx({r, s}) + ")");
      Vec b = axpy(T[r].apply(D.phi(s, s)), -1, N[s].apply(D.phi(r, s)), p);
      if (!is_zero_vec(b)) rep.fail("(ii) T_r phi_ss - N_s phi_rs != 0 at (r,s)=(" + idx({r, s}) + ")");
    }
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s)
      for (int t = s + 1; t < m; ++t) {
        Vec v = T[r].apply(D.phi(s, t));
        v = axpy(v, -1, T[s].apply(D.phi(r, t)), p);
        v = axpy(v, 1, T[t].apply(D.phi(r, s)), p);
        if (!is_zero_vec(v)) rep.fail("(iii) three-index relation fails at (r,s,t)=(" + idx({r, s, t}) + ")");
      }
  return rep;
}

bool cocycle_identity_exhaustive(const ExtDatum& D, std::uint64_t budget) {
  validate_datum(D);
  const int p = D.p, m = D.m;
  auto H = all_exponents(p, m);
  const std::uint64_t q = H.size();
  if (q * q * q > budget) throw Error(ErrorCode::BudgetExceeded, "cocycle identity: |H|^3 exceeds budget");
  // Index of an exponent vector in H (first entry least significant).
  auto code = [&](const Vec& e) {
    std::uint64_t c = 0;
    for (int r = m - 1; r >= 0; --r) c = c * p + e[r];
    return c;
  };
  std::vector<Vec> byCode(q);
  for (const auto& e : H) byCode[code(e)] = e;
  auto mul = [&](std::uint64_t a, std::uint64_t b) {
    Vec e(m);
    for (int r = 0; r < m; ++r) e[r] = static_cast<u8>((byCode[a][r] + byCode[b][r]) % p);
    return code(e);
  };
  std::vector<Vec> table(q * q);
  for (std::uint64_t a = 0; a < q; ++a)
    for (std::uint64_t b = 0; b < q; ++b) table[a * q + b] = cocycle_eval(D, byCode[a], byCode[b]);
  std::vector<Mat> act(q);
  for (std::uint64_t a = 0; a < q; ++a) act[a] = D.gamma_of(byCode[a]);
  for (std::uint64_t h = 0; h < q; ++h)
    for (std::uint64_t k = 0; k < q; ++k) {
      std::uint64_t hk = mul(h, k);
      for (std::uint64_t l = 0; l < q; ++l) {
        Vec v = act[h].apply(table[k * q + l]);
        v = axpy(v, -1, table[hk * q + l], p);
        v = axpy(v, 1, table[h * q + mul(k, l)], p);
        v = axpy(v, -1, table[h * q + k], p);
        if (!is_zero_vec(v)) return false;
      }
    }
  return true;
}

std::optional<std::vector<Vec>> coboundary_test(const ExtDatum& D) {
  validate_datum(D);
  const int p = D.p, m = D.m, n = D.n;
  auto T = t_ops(D);
  const int eqCount = m + m * (m - 1) / 2;
  Mat M(p, eqCount * n, m * n);
  Vec rhs(eqCount * n, 0);
  int row = 0;
  for (int r = 0; r < m; ++r) {
    M.set_block(row, r * n, power_sum(D.gammas[r], p));
    Vec f = D.phi(r, r);
    for (int i = 0; i < n; ++i) rhs[row + i] = f[i];
    row += n;
  }
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s) {
      M.set_block(row, s * n, T[r]);
      M.set_block(row, r * n, -T[s]);
      Vec f = D.phi(r, s);
      for (int i = 0; i < n; ++i) rhs[row + i] = f[i];
      row += n;
    }
  auto sol = solve_affine(M, rhs);
  if (!sol.particular) return std::nullopt;
  std::vector<Vec> a(m, Vec(n));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < n; ++i) a[r][i] = (*sol.particular)[r * n + i];
  // Verify the witness against both defining identities.
  for (int r = 0; r < m; ++r)
    if (power_sum(D.gammas[r], p).apply(a[r]) != D.phi(r, r))
      throw Error(ErrorCode::InvalidInput, "coboundary_test: witness verification failed");
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s)
      if (axpy(T[r].apply(a[s]), -1, T[s].apply(a[r]), p) != D.phi(r, s))
        throw Error(ErrorCode::InvalidInput, "coboundary_test: witness verification failed");
  return a;
}

// ---------------------------------------------------------------------------
// Exponent-p criteria.

namespace {

void check_module(const ExtDatum& D, CheckReport& rep) {
  for (int r = 0; r < D.m; ++r) {
    if (D.gammas[r].pow(D.p) != Mat::identity(D.p, D.n)) rep.fail("(1) Gamma^(" + idx({r}) + ")^p != I");
    for (int s = r + 1; s < D.m; ++s)
      if (D.gammas[r] * D.gammas[s] != D.gammas[s] * D.gammas[r])
        rep.fail("(1) Gamma^(" + idx({r}) + ") and Gamma^(" + idx({s}) + ") do not commute");
  }
}

void check_diag_and_triple(const ExtDatum& D, const std::vector<Mat>& T, CheckReport& rep) {
  const int p = D.p, m = D.m;
  for (int r = 0; r < m; ++r)
    if (!is_zero_vec(D.phi(r, r))) rep.fail("(3)(a) phi_rr != 0 at r=" + idx({r}));
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s)
      for (int t = s + 1; t < m; ++t) {
        Vec v = T[r].apply(D.phi(s, t));
        v = axpy(v, -1, T[s].apply(D.phi(r, t)), p);
        v = axpy(v, 1, T[t].apply(D.phi(r, s)), p);
        if (!is_zero_vec(v)) rep.fail("(3)(c) fails at (r,s,t)=(" + idx({r, s, t}) + ")");
      }
}

}  // namespace

CheckReport exponent_p_test_general(const ExtDatum& D) {
  validate_datum(D);
  CheckReport rep;
  const int p = D.p, m = D.m, n = D.n;
  check_module(D, rep);
  auto T = t_ops(D);
  // (2) T_{r_1} ... T_{r_{p-1}} = 0 for r_1 <= ... <= r_{p-1}.
  if (m > 0) {
    std::vector<int> seq(p - 1, 0);
    std::function<void(int, int, const Mat&)> rec = [&](int pos, int from, const Mat& acc) {
      if (pos == p - 1) {
        if (!acc.is_zero()) {
          std::string s;
          for (int x : seq) s += (s.empty() ? "" : ",") + std::to_string(x + 1);
          rep.fail("(2) product T_{" + s + "} != 0");
        }
        return;
      }
      for (int r = from; r < m; ++r) {
        seq[pos] = r;
        rec(pos + 1, r, acc * T[r]);
      }
    };
    rec(0, 0, Mat::identity(p, n));
  }
  check_diag_and_triple(D, T, rep);
  // (3)(b): for 1 <= l <= p-1, r_1 < ... < r_{l+1}, i_1 + ... + i_{l+1} = p-l-1:
  // T_{r_1}^{i_1} ... T_{r_{l+1}}^{i_{l+1}} (sum_u (i_u + 1) prod_{v != u, v <= l} T_{r_v} phi_{r_u, r_{l+1}}) = 0.
  for (int l = 1; l <= p - 1 && l + 1 <= m; ++l) {
    std::vector<int> rs(l + 1);
    std::function<void(int, int)> chooseR = [&](int pos, int from) {
      if (pos == l + 1) {
        std::vector<int> is(l + 1, 0);
        std::function<void(int, int)> chooseI = [&](int pos2, int left) {
          if (pos2 == l) {
            is[l] = left;
            Vec sum(n, 0);
            for (int u = 0; u < l; ++u) {
              Vec v = D.phi(rs[u], rs[l]);
              for (int w = 0; w < l; ++w)
                if (w != u) v = T[rs[w]].apply(v);
              sum = axpy(sum, is[u] + 1, v, p);
            }
            for (int j = 0; j <= l; ++j)
              for (int e = 0; e < is[j]; ++e) sum = T[rs[j]].apply(sum);
            if (!is_zero_vec(sum)) {
              std::string r, i;
              for (int j = 0; j <= l; ++j) {
                r += (j ? "," : "") + std::to_string(rs[j] + 1);
                i += (j ? "," : "") + std::to_string(is[j]);
              }
              rep.fail("(3)(b) fails at l=" + std::to_string(l) + " r=(" + r + ") i=(" + i + ")");
            }
            return;
          }
          for (int x = 0; x <= left; ++x) {
            is[pos2] = x;
            chooseI(pos2 + 1, left - x);
          }
        };
        chooseI(0, p - l - 1);
        return;
      }
      for (int r = from; r < m; ++r) {
        rs[pos] = r;
        chooseR(pos + 1, r + 1);
      }
    };
    chooseR(0, 0);
  }
  return rep;
}

CheckReport exponent_p_test_p3(const ExtDatum& D) {
  validate_datum(D);
  if (D.p != 3) throw Error(ErrorCode::InvalidInput, "exponent_p_test_p3: p must be 3");
  CheckReport rep;
  const int p = 3, m = D.m;
  check_module(D, rep);
  auto T = t_ops(D);
  for (int r = 0; r < m; ++r)
    for (int s = r; s < m; ++s)
      if (!(T[r] * T[s]).is_zero()) rep.fail("(2) (h_r - 1)(h_s - 1) != 0 at (r,s)=(" + idx({r, s}) + ")");
  for (int r = 0; r < m; ++r)
    if (!is_zero_vec(D.phi(r, r))) rep.fail("(3)(a) phi_rr != 0 at r=" + idx({r}));
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s) {
      Vec f = D.phi(r, s);
      if (!is_zero_vec(T[r].apply(f)) || !is_zero_vec(T[s].apply(f)))
        rep.fail("(3)(b) h_r, h_s do not fix phi_rs at (r,s)=(" + idx({r, s}) + ")");
    }
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s)
      for (int t = s + 1; t < m; ++t) {
        Vec a = T[r].apply(D.phi(s, t));
        Vec b = axpy(Vec(D.n, 0), -1, T[s].apply(D.phi(r, t)), p);
        Vec c = T[t].apply(D.phi(r, s));
        if (a != b || b != c) rep.fail("(3)(c) fails at (r,s,t)=(" + idx({r, s, t}) + ")");
      }
  return rep;
}

CheckReport exponent_p_test(const ExtDatum& D) {
  return D.p == 3 ? exponent_p_test_p3(D) : exponent_p_test_general(D);
}

// ---------------------------------------------------------------------------
// Module structure.

Mat derived_submodule(const ExtDatum& D) {
  validate_datum(D);
  const int p = D.p, m = D.m, n = D.n;
  std::vector<Vec> gens;
  for (int r = 0; r < m; ++r)
    for (int s = r + 1; s < m; ++s) gens.push_back(D.phi(r, s));
  auto T = t_ops(D);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < n; ++j) gens.push_back(T[r].col_vec(j));
  Mat S = row_space(stack_rows(gens, p, n));
  for (;;) {
    std::vector<Vec> more;
    for (int i = 0; i < S.rows; ++i) {
      more.push_back(S.row_vec(i));
      for (int r = 0; r < m; ++r) more.push_back(D.gammas[r].apply(S.row_vec(i)));
    }
    Mat S2 = row_space(stack_rows(more, p, n));
    if (S2.rows == S.rows) return S2;
    S = S2;
  }
}

int loewy_length(const ExtDatum& D) {
  validate_datum(D);
  const int p = D.p, n = D.n;
  auto T = t_ops(D);
  Mat M = Mat::identity(p, n);
  int l = 0;
  while (M.rows > 0) {
    if (l > n) throw Error(ErrorCode::InvalidInput, "loewy_length: radical series does not terminate");
    std::vector<Vec> next;
    for (int i = 0; i < M.rows; ++i)
      for (const auto& Tr : T) next.push_back(Tr.apply(M.row_vec(i)));
    M = row_space(stack_rows(next, p, n));
    ++l;
  }
  return l;
}

Mat socle(const ExtDatum& D) {
  validate_datum(D);
  Mat S(D.p, 0, D.n);
  for (const auto& Tr : t_ops(D)) S = vstack(S, Tr);
  return row_space(stack_rows(kernel(S), D.p, D.n));
}

// ---------------------------------------------------------------------------
// Change of basis and twists.

namespace {

void check_transitions(const ExtDatum& D, const Mat& CH, const Mat& CA) {
  if (CH.rows != D.m || CH.cols != D.m || CA.rows != D.n || CA.cols != D.n)
    throw Error(ErrorCode::SingularTransition, "change_basis: transition matrices have the wrong shape");
  if (rank(CH) != D.m) throw Error(ErrorCode::SingularTransition, "change_basis: C_H is not invertible");
  if (rank(CA) != D.n) throw Error(ErrorCode::SingularTransition, "change_basis: C_A is not invertible");
}

ExtDatum transported_gammas(const ExtDatum& D, const Mat& CH, const Mat& CAinv, const Mat& CA) {
  ExtDatum E = ExtDatum::trivial(D.p, D.m, D.n);
  for (int r = 0; r < D.m; ++r) E.gammas[r] = CAinv * D.gamma_of(CH.col_vec(r)) * CA;
  return E;
}

// phi'_rr = sum_{k < p} phi(h'^k_r, h'_r) in old coordinates.
Vec new_diagonal(const ExtDatum& D, const Vec& hr) {
  Vec acc(D.n, 0), pw(D.m, 0);
  for (int k = 0; k < D.p; ++k) {
    acc = add(acc, cocycle_eval(D, pw, hr), D.p);
    for (int u = 0; u < D.m; ++u) pw[u] = static_cast<u8>((pw[u] + hr[u]) % D.p);
  }
  return acc;
}

}  // namespace

ExtDatum change_basis(const ExtDatum& D, const Mat& CH, const Mat& CA) {
  validate_datum(D);
  check_transitions(D, CH, CA);
  const int p = D.p, m = D.m;
  Mat CAinv = invert(CA);
  ExtDatum E = transported_gammas(D, CH, CAinv, CA);
  // Sigma_{ru} = rho(h_{r;u}), h_{r;u} = h_1^{beta_1r} ... h_{u-1}^{beta_{u-1,r}} (h_u)_{beta_ur}.
  std::vector<std::vector<Mat>> Sigma(m, std::vector<Mat>(m));
  for (int r = 0; r < m; ++r) {
    Mat prefix = Mat::identity(p, D.n);
    for (int u = 0; u < m; ++u) {
      int b = CH.at(u, r);
      Sigma[r][u] = prefix * power_sum(D.gammas[u], b);
      prefix = prefix * D.gammas[u].pow(b);
    }
  }
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s) {
      Vec acc(D.n, 0);
      if (r == s) {
        acc = new_diagonal(D, CH.col_vec(r));
      } else {
        for (int u = 0; u < m; ++u)
          for (int v = 0; v < m; ++v) {
            if (u == v) continue;
            acc = add(acc, (Sigma[r][u] * Sigma[s][v]).apply(D.phi(u, v)), p);
          }
      }
      E.set_phi(r, s, CAinv.apply(acc));
    }
  return E;
}

ExtDatum change_basis_oracle(const ExtDatum& D, const Mat& CH, const Mat& CA) {
  validate_datum(D);
  check_transitions(D, CH, CA);
  Mat CAinv = invert(CA);
  ExtDatum E = transported_gammas(D, CH, CAinv, CA);
  for (int r = 0; r < D.m; ++r)
    for (int s = 0; s < D.m; ++s) {
      Vec v = r == s ? new_diagonal(D, CH.col_vec(r))
                     : axpy(cocycle_eval(D, CH.col_vec(r), CH.col_vec(s)), -1,
                            cocycle_eval(D, CH.col_vec(s), CH.col_vec(r)), D.p);
      E.set_phi(r, s, CAinv.apply(v));
    }
  return E;
}

Mat stack_phis(const ExtDatum& D) {
  Mat S(D.p, D.m * D.n, D.m);
  for (int r = 0; r < D.m; ++r)
    for (int i = 0; i < D.n; ++i)
      for (int s = 0; s < D.m; ++s) S.at(r * D.n + i, s) = D.phis[i].at(r, s);
  return S;
}

std::vector<Mat> unstack_phis(const Mat& S, int m, int n) {
  std::vector<Mat> out(n, Mat(S.p, m, m));
  for (int r = 0; r < m; ++r)
    for (int i = 0; i < n; ++i)
      for (int s = 0; s < m; ++s) out[i].at(r, s) = S.at(r * n + i, s);
  return out;
}

std::optional<Mat> twist_equivalence_test(const ExtDatum& D, const ExtDatum& E) {
  validate_datum(D);
  validate_datum(E);
  if (D.p != E.p || D.m != E.m || D.n != E.n || D.gammas != E.gammas)
    throw Error(ErrorCode::GammaMismatch, "twist_equivalence_test: data have different actions");
  const int p = D.p, m = D.m, n = D.n;
  if (m == 0 || n == 0) return D.phis == E.phis ? std::optional<Mat>(Mat(p, n, m)) : std::nullopt;
  Mat Gamma(p, m * n, n);
  for (int r = 0; r < m; ++r) Gamma.set_block(r * n, 0, D.gammas[r] - Mat::identity(p, n));
  // Linear map X -> Gamma X - T_{n,1}(Gamma X), flattened row-major.
  const int unknowns = n * m, eqs = m * n * m;
  Mat L(p, eqs, unknowns);
  for (int c = 0; c < unknowns; ++c) {
    Mat X(p, n, m);
    X.e[c] = 1;
    Mat GX = Gamma * X;
    Mat img = GX - block_transpose(GX, n, 1);
    for (int k = 0; k < eqs; ++k) L.at(k, c) = img.e[k];
  }
  Mat diff = stack_phis(D) - stack_phis(E);
  auto sol = solve_affine(L, diff.e);
  if (!sol.particular) return std::nullopt;
  Mat X(p, n, m);
  X.e = *sol.particular;
  Mat GX = Gamma * X;
  if (GX - block_transpose(GX, n, 1) != diff)
    throw Error(ErrorCode::InvalidInput, "twist_equivalence_test: witness verification failed");
  return X;
}

// ---------------------------------------------------------------------------
// Products and the bridge to subspaces.

ExtDatum product_datum(const ExtDatum& D1, const ExtDatum& D2) {
  validate_datum(D1);
  validate_datum(D2);
  if (D1.p != D2.p) throw Error(ErrorCode::InvalidInput, "product_datum: different p");
  const int p = D1.p, m = D1.m + D2.m, n = D1.n + D2.n;
  ExtDatum D = ExtDatum::trivial(p, m, n);
  for (int r = 0; r < D1.m; ++r) D.gammas[r] = block_diag(D1.gammas[r], Mat::identity(p, D2.n));
  for (int r = 0; r < D2.m; ++r) D.gammas[D1.m + r] = block_diag(Mat::identity(p, D1.n), D2.gammas[r]);
  for (int i = 0; i < D1.n; ++i) D.phis[i].set_block(0, 0, D1.phis[i]);
  for (int i = 0; i < D2.n; ++i) D.phis[D1.n + i].set_block(D1.m, D1.m, D2.phis[i]);
  return D;
}

ExtDatum datum_from_subspace(const SkewSubspace& V) {
  ExtDatum D = ExtDatum::trivial(V.p, V.m, V.d);
  D.phis = V.forms();
  return D;
}

SkewSubspace subspace_from_datum(const ExtDatum& D) {
  validate_datum(D);
  if (!D.trivial_action()) throw Error(ErrorCode::NontrivialAction, "subspace_from_datum: action is not trivial");
  for (const auto& F : D.phis)
    if (!is_skew(F)) throw Error(ErrorCode::InvalidInput, "subspace_from_datum: Phi has a nonzero diagonal");
  return canonical_basis(D.p, D.m, D.phis);
}

ExtDatum datum_i3() {
  ExtDatum D = ExtDatum::trivial(3, 2, 1);
  D.set_phi(0, 1, {1});
  D.set_phi(1, 0, {2});
  return D;
}

ExtDatum datum_i79() {
  ExtDatum D = ExtDatum::trivial(3, 3, 4);
  // h_i acts by a_i -> a_i + a_4 (i = 1, 2, 3).
  for (int r = 0; r < 3; ++r) D.gammas[r].at(3, r) = 1;
  // phi_23 = a_1, phi_13 = -a_2, phi_12 = a_3.
  auto setp = [&](int r, int s, Vec v) {
    D.set_phi(r, s, v);
    for (auto& x : v) x = static_cast<u8>((3 - x) % 3);
    D.set_phi(s, r, v);
  };
  setp(1, 2, {1, 0, 0, 0});
  setp(0, 2, {0, 2, 0, 0});
  setp(0, 1, {0, 0, 1, 0});
  return D;
}

nlohmann::json datum_to_json(const ExtDatum& D) {
  nlohmann::json g = nlohmann::json::array(), f = nlohmann::json::array();
  for (const auto& G : D.gammas) g.push_back(mat_to_json(G));
  for (const auto& F : D.phis) f.push_back(mat_to_json(F));
  return {{"p", D.p}, {"m", D.m}, {"n", D.n}, {"gammas", g}, {"phis", f}};
}

ExtDatum datum_from_json(const nlohmann::json& j) {
  ExtDatum D;
  try {
    D.p = j.at("p").get<int>();
    D.m = j.at("m").get<int>();
    D.n = j.at("n").get<int>();
    for (const auto& g : j.at("gammas")) D.gammas.push_back(mat_from_json(g));
    for (const auto& f : j.at("phis")) D.phis.push_back(mat_from_json(f));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, std::string("datum JSON: ") + ex.what());
  }
  validate_datum(D);
  return D;
}

}  // namespace pga
