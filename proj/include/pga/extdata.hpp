#pragma once

// Extension data (H, A, rho, phi) with H = Z_p^m and A = Z_p^n given by a
// matrix presentation: Gamma^{(r)} is the matrix of rho(h_r) acting on column
// coordinate vectors of A, and Phi^{(i)} collects the i-th coordinates of the
// elements phi_rs. The 2-cochain is the explicit formula in these elements.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pga/subspace.hpp"

namespace pga {

struct ExtDatum {
  int p = 3;
  int m = 0;  // rank of H
  int n = 0;  // rank of A
  std::vector<Mat> gammas;  // m matrices, n x n
  std::vector<Mat> phis;    // n matrices, m x m

  // phi_rs as a vector of A (0-based r, s).
  Vec phi(int r, int s) const;
  void set_phi(int r, int s, const Vec& v);
  // rho(h) for h = h_1^{e_1} ... h_m^{e_m}.
  Mat gamma_of(const Vec& e) const;
  bool trivial_action() const;
  bool operator==(const ExtDatum& o) const {
    return p == o.p && m == o.m && n == o.n && gammas == o.gammas && phis == o.phis;
  }

  // Identity gammas and zero phis.
  static ExtDatum trivial(int p, int m, int n);
};

// Shape and module checks: gamma count/shape, invertibility, pairwise
// commuting, Gamma^p = I, off-diagonal skewness of every Phi. Throws
// InvalidInput naming the first problem.
void validate_datum(const ExtDatum& D);

// The normalized 2-cochain phi(h, k) for exponent vectors h, k in [0, p).
Vec cocycle_eval(const ExtDatum& D, const Vec& h, const Vec& k);

struct CheckReport {
  bool ok = true;
  std::vector<std::string> violations;
  void fail(std::string s) {
    ok = false;
    violations.push_back(std::move(s));
  }
};

// The linear criteria for phi to be a 2-cocycle: clause (i) T_r phi_rr = 0,
// (ii) N_r phi_rs + T_s phi_rr = 0 and T_r phi_ss - N_s phi_rs = 0, (iii)
// T_r phi_st - T_s phi_rt + T_t phi_rs = 0.
CheckReport cocycle_validate(const ExtDatum& D);
// Direct check of h.phi(k,l) - phi(hk,l) + phi(h,kl) - phi(h,k) = 0 on all of
// H^3; throws BudgetExceeded when p^{3m} > budget.
bool cocycle_identity_exhaustive(const ExtDatum& D, std::uint64_t budget = 20000000);

// a_1..a_m with phi_rr = N_r a_r and phi_rs = T_r a_s - T_s a_r, or nullopt.
std::optional<std::vector<Vec>> coboundary_test(const ExtDatum& D);

// Exponent-p criterion: (2) every product of p-1 operators T_r kills A,
// (3)(a) phi_rr = 0, (3)(b) the weighted annihilation sums, (3)(c) the
// three-index relation. For p = 3 the simplified form is used.
CheckReport exponent_p_test(const ExtDatum& D);
CheckReport exponent_p_test_general(const ExtDatum& D);
CheckReport exponent_p_test_p3(const ExtDatum& D);

// Smallest Gamma-invariant subspace containing all phi_rs (r < s) and the
// images of Gamma^{(r)} - I; rows in RREF.
Mat derived_submodule(const ExtDatum& D);
// Least l with rad^l(A) = 0, rad(M) = sum_r (Gamma^{(r)} - I) M.
int loewy_length(const ExtDatum& D);
// Socle {a : Gamma^{(r)} a = a for all r}; rows in RREF.
Mat socle(const ExtDatum& D);

// New bases h'_r = prod_u h_u^{beta_ur} (C_H = (beta)) and a'_i = sum_l
// alpha_li a_l (C_A = (alpha)). Throws SingularTransition.
ExtDatum change_basis(const ExtDatum& D, const Mat& CH, const Mat& CA);
// Phi' computed directly: phi'_rs = phi(h'_r, h'_s) - phi(h'_s, h'_r) and
// phi'_rr = sum_k phi(h'^k_r, h'_r), expressed in the new A basis.
ExtDatum change_basis_oracle(const ExtDatum& D, const Mat& CH, const Mat& CA);

// X (n x m) with Phi - Phi~ = Gamma X - T_{n,1}(Gamma X) in the stacked mn x m
// layout (row (r-1)n + i); nullopt when unsolvable. GammaMismatch when the
// gammas differ.
std::optional<Mat> twist_equivalence_test(const ExtDatum& D, const ExtDatum& E);
// Stacked mn x m layout of the Phi's and back.
Mat stack_phis(const ExtDatum& D);
std::vector<Mat> unstack_phis(const Mat& S, int m, int n);

ExtDatum product_datum(const ExtDatum& D1, const ExtDatum& D2);

// Trivial action, n = d, Phi^{(i)} = i-th basis form.
ExtDatum datum_from_subspace(const SkewSubspace& V);
// Span of the Phi's; NontrivialAction unless all gammas are the identity.
SkewSubspace subspace_from_datum(const ExtDatum& D);

// Built-in fixtures.
ExtDatum datum_i3();   // m = 2, n = 1, phi_12 = a_1
ExtDatum datum_i79();  // m = 3, n = 4, nontrivial action

nlohmann::json datum_to_json(const ExtDatum& D);
ExtDatum datum_from_json(const nlohmann::json& j);

}  // namespace pga
