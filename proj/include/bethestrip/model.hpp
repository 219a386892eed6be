#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bethestrip/linalg.hpp"
#include "bethestrip/rng.hpp"

namespace bethe {

// --- disorder ensembles -----------------------------------------------------

// Deterministic potential V(x) = v0 at every site.
struct PointMass {
    RealSymMatrix v0;
};

// Diagonal potential with i.i.d. entries; off-diagonal entries vanish.
struct DiagonalIID {
    enum class Law { uniform, gauss, bernoulli };  // U[-1,1], N(0,1), +-1
    Law law = Law::uniform;
    int m = 1;
};

// Gaussian Orthogonal Ensemble: diagonal variance 1, off-diagonal variance 1/2.
struct GOE {
    int m = 1;
};

using DisorderEnsemble = std::variant<PointMass, DiagonalIID, GOE>;

int ensemble_dim(const DisorderEnsemble& ensemble);
std::string ensemble_name(const DisorderEnsemble& ensemble);
bool has_bounded_support(const DisorderEnsemble& ensemble);

// Grammar: "point:<path-or-inline>" | "diag:uniform" | "diag:gauss" |
// "diag:bernoulli" | "goe". Inline point matrices are rows separated by ';'
// with entries separated by ',' (e.g. "point:1,0;0,2"); a single number is
// accepted for m = 1. `m` fixes the width of the parametrized ensembles.
DisorderEnsemble parse_ensemble(const std::string& spec, int m);

// --- model ------------------------------------------------------------------

struct RealInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(lo < hi); }
    bool contains(double x) const { return lo < x && x < hi; }
    double width() const { return empty() ? 0.0 : hi - lo; }
};

// H = (1/2) Laplacian (x) 1 + 1 (x) A + lambda V on the Bethe lattice of
// connectivity K (every site has K+1 neighbours) times m orbitals.
class BetheStripModel {
public:
    BetheStripModel(int K, std::vector<double> a, double lambda, DisorderEnsemble ensemble);

    int K() const { return K_; }
    int m() const { return static_cast<int>(a_.size()); }
    const std::vector<double>& a() const { return a_; }
    double a_min() const { return a_.front(); }
    double a_max() const { return a_.back(); }
    double lambda() const { return lambda_; }
    const DisorderEnsemble& ensemble() const { return ensemble_; }

    // Deterministic part A + lambda V0 when the ensemble is a point mass or
    // lambda == 0.
    bool is_deterministic() const;

    BetheStripModel with_lambda(double lambda) const;

private:
    int K_;
    std::vector<double> a_;
    double lambda_;
    DisorderEnsemble ensemble_;
};

// (-sqrt K + a_max, sqrt K + a_min); empty when a_max - a_min >= 2 sqrt K.
RealInterval interval_iak(const BetheStripModel& model);

RealSymMatrix sample_potential(const DisorderEnsemble& ensemble, Stream& rng);

// Potential at a site of a given disorder realization; shared by the tree
// recursion and the finite-volume solver so both see identical samples.
RealSymMatrix site_potential(const DisorderEnsemble& ensemble, std::uint64_t seed,
                             std::uint64_t realization, std::uint64_t site);

// h(M) = E exp(-i Tr(M V)).
cplx characteristic_fn(const DisorderEnsemble& ensemble, const RealSymMatrix& M);

// sigma(H) = [-sqrt K, sqrt K] + sigma(A + lambda V), V over supp mu, as a
// sorted union of disjoint closed intervals. Exact for point masses,
// lambda == 0 and diagonal ensembles with bounded support.
std::vector<RealInterval> deterministic_spectrum(const BetheStripModel& model);

// Diagonal A as a real matrix.
RealSymMatrix a_matrix(const BetheStripModel& model);

}  // namespace bethe
