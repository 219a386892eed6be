#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "bethestrip/linalg.hpp"
#include "bethestrip/model.hpp"

namespace bethe {

// Upper-triangular non-negative integer matrix J, stored as exponents of the
// slots (j, k), j <= k, in row-major order: (0,0), (0,1), ..., (m-1,m-1).
// Indexes the monomial X^J = prod X_jk^{J_jk} of a symmetric matrix variable.
struct MonomialIndex {
    int m = 1;
    std::vector<int> exps;

    static MonomialIndex zero(int m);
    int degree() const;
    int at(int j, int k) const;  // J_jk for j <= k, 0 otherwise
    std::string label() const;   // exponents joined by '-'

    auto operator<=>(const MonomialIndex&) const = default;
};

// All J with |J| <= max_degree, ascending in degree and descending
// lexicographically within a degree.
std::vector<MonomialIndex> enumerate_indices(int m, int max_degree);

// Number of slots m(m+1)/2.
int slot_count(int m);

// lambda_J = prod_{j<=k} [4 (A_E)_jj (A_E)_kk]^{J_jk}; E strictly inside I_{A,K}.
cplx lambda_j(double E, const BetheStripModel& model, const MonomialIndex& J);

struct ModulusReport {
    double max_modulus_error = 0.0;  // max | |lambda_J| - K^{-|J|} |
    double min_distance = 0.0;       // min |lambda_J - 1/K|
    std::size_t count = 0;
};

// Checks |lambda_J| == K^{-|J|} to 1e-12 and lambda_J != 1/K for |J| <= d;
// throws VerificationFailure naming the offending J.
ModulusReport verify_modulus(double E, const BetheStripModel& model, int max_degree);

// min |K lambda_J - 1| over enumerated J together with the floor 1 - 1/K
// that bounds every |J| >= 2. At max_degree 0 only J = 0 is used.
double gap_kce(double E, const BetheStripModel& model, int max_degree);

// Same for K lambda_J conj(lambda_J') - 1 over pairs with |J| + |J'| <= d.
double gap_tensor(double E, const BetheStripModel& model, int max_degree);

// min |lambda_J - 1/K| over |J| <= d.
double min_distance_to_inverse_k(double E, const BetheStripModel& model, int max_degree);

// Polynomial in the entries of X times exp(i Tr(C X)).
struct PolyGaussSymbol {
    int m = 1;
    std::map<MonomialIndex, cplx> coeffs;
    ComplexSymMatrix gauss;

    int degree() const;
};

// The basis element X^J zeta_{0,E}, zeta_{0,E}(X) = exp(-i Tr(A_E X)).
PolyGaussSymbol working_symbol(double E, const BetheStripModel& model, const MonomialIndex& J, cplx coeff = 1.0);

// Matrix of C_E on {X^J zeta_{0,E} : |J| <= d}; entries(row J', col J) is
// the coefficient of X^{J'} in C_E(X^J zeta).
struct OperatorMatrix {
    std::vector<MonomialIndex> basis;
    MatrixC entries;
    double triangularity_residual = 0.0;  // max |entry| with degree(row) > degree(col)
    double diagonal_error = 0.0;          // max |entry(J,J) - lambda_J|
};

// Built from the generating identity
//   C_E exp(i Tr(M X)) zeta = exp((i/4) Tr((B - M)^{-1} X)),  B = A - E + K A_E,
// by attaching one formal parameter per slot to M and expanding with
// truncated multivariate power series.
OperatorMatrix build_ce_matrix(double E, const BetheStripModel& model, int max_degree);

// C_E applied to a symbol over the working Gaussian -A_E.
PolyGaussSymbol ce_apply_symbol(double E, const BetheStripModel& model, const PolyGaussSymbol& s, int max_degree);

// B^{-1} = (A - E + K A_E)^{-1}, computed directly (equals -4 A_E).
ComplexSymMatrix generating_inverse(double E, const BetheStripModel& model);

}  // namespace bethe
