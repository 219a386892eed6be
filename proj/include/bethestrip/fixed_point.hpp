#pragma once

#include <string>
#include <vector>

#include "bethestrip/linalg.hpp"
#include "bethestrip/model.hpp"

namespace bethe {

// Deterministic self-consistency G = [A + lambda V0 - z - (K/4) G]^{-1}.
// For point-mass disorder (and lambda = 0) the Gaussian family
// exp((i/4) Tr(G X)) is invariant under the recursion, so this matrix
// equation is the whole fixed point.
struct FixedPointProblem {
    BetheStripModel model;
    SpectralPoint z;
    ComplexSymMatrix initial;

    FixedPointProblem(BetheStripModel model, SpectralPoint z, ComplexSymMatrix initial);
};

struct SolveReport {
    enum class Method { picard, newton };

    ComplexSymMatrix solution;
    double residual = 0.0;
    int iterations = 0;
    Method method = Method::picard;
    bool converged = false;
    double eta = 0.0;
    std::vector<double> residual_history;
};

inline constexpr double default_fixed_point_tol = 1e-11;

// G -> [A + lambda V0 - z - (K/4) G]^{-1}
ComplexSymMatrix fixed_point_map(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G);
// |G - map(G)|_max, evaluated through an independent dense inverse.
double fixed_point_residual_norm(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G);

// Damped iteration G <- (1 - theta) G + theta map(G). Throws NoConvergence.
SolveReport picard_solve(const FixedPointProblem& problem, double theta = 0.5, double tol = default_fixed_point_tol,
                         int max_iter = 100000);

// Newton on R(G) = G - map(G) over the m(m+1)/2 upper-triangle coordinates.
// Throws SingularJacobian or NoConvergence.
SolveReport newton_solve(const FixedPointProblem& problem, double tol = default_fixed_point_tol, int max_iter = 50);

// Jacobian of R at G: column p is R'(G)[E_p], E_p the symmetric unit matrix
// of slot p = (j <= k) in row-major upper-triangle order.
MatrixC fixed_point_jacobian(const BetheStripModel& model, const SpectralPoint& z, const ComplexSymMatrix& G);

// Picard with damping theta until the residual drops below `switch_at`, then
// Newton.
SolveReport hybrid_solve(const FixedPointProblem& problem, double theta = 0.5, double switch_at = 1e-3,
                         double tol = default_fixed_point_tol);

struct ContinuationOptions {
    double eta_start = 1.0;
    double eta_factor = 0.5;
    double eta_min = 1e-8;
    double tol = default_fixed_point_tol;
};

// eta_k = eta_start * eta_factor^k down to eta_min, then eta = 0, each solve
// warm-started from the previous one. Throws ContinuationBreakdown when a
// step loses the Herglotz branch or the final eta = 0 solution has no
// strictly positive imaginary part.
std::vector<SolveReport> continuation_to_boundary(const BetheStripModel& model, double E,
                                                  const ContinuationOptions& options = {});

std::vector<int> upper_index_pairs(int m);  // flattened (j, k) pairs, j <= k
MatrixC upper_vector(const MatrixC& a);      // column vector of upper-triangle entries
ComplexSymMatrix from_upper_vector(const MatrixC& v, int m);

}  // namespace bethe
