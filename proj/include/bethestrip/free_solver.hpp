#pragma once

#include <optional>

#include "bethestrip/linalg.hpp"
#include "bethestrip/model.hpp"

namespace bethe {

// Closed-form objects of the disorder-free strip. At lambda = 0 the operator
// splits into m shifted copies of the Bethe-lattice Laplacian, so every
// matrix here is diagonal.

// (A_E)_kk = ((E - a_k) - i sqrt(K - (E - a_k)^2)) / 2K. Band edges
// |E - a_k| = sqrt K are admitted; beyond them throws OutOfBand.
ComplexSymMatrix a_e_matrix(double E, const BetheStripModel& model);

// Forward (rooted, K children) Green's matrix,
//   g_k = (2/K) (-(z - a_k) + sqrt_upper((z - a_k)^2 - K)),
// the Im g > 0 root of (K/4) g^2 + (z - a_k) g + 1 = 0. At eta = 0 every
// |E - a_k| must be strictly below sqrt K.
ComplexSymMatrix free_forward_green(const SpectralPoint& z, const BetheStripModel& model);

// Real boundary value lim_{eta -> 0+} of free_forward_green, valid at every
// real E off the band edges (inside a band it agrees with the eta = 0 value).
ComplexSymMatrix free_forward_green_boundary(double E, const BetheStripModel& model);

// Root Green's matrix with K+1 neighbours: [A - z - ((K+1)/4) g]^{-1}.
ComplexSymMatrix free_full_green(const SpectralPoint& z, const BetheStripModel& model);

// zeta(M) = exp((i/4) Tr(g M)) for a positive semidefinite M.
cplx zeta_free(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& M);

// xi(M+, M-) = zeta(M+) conj(zeta(M-)).
cplx xi_free(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& Mp,
             const RealSymMatrix& Mm);

struct FreeSolution {
    SpectralPoint z;
    ComplexSymMatrix forward;
    ComplexSymMatrix full;
    std::optional<ComplexSymMatrix> ae;  // only at eta = 0
};

FreeSolution free_solution(const SpectralPoint& z, const BetheStripModel& model);

}  // namespace bethe
