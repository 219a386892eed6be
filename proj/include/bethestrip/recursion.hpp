#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bethestrip/linalg.hpp"
#include "bethestrip/model.hpp"
#include "bethestrip/stats.hpp"

namespace bethe {

// --- single recursion steps ---------------------------------------------------

// [A + lambda V - z - (1/4) sum(neighbors)]^{-1}. Reusable buffers, no
// allocation per call; used by every hot loop.
class StepKernel {
public:
    StepKernel(const BetheStripModel& model, const SpectralPoint& z);

    void begin(const RealSymMatrix& V);
    void add_neighbor(const cplx* g);  // column-major m x m
    void add_neighbor(const MatrixC& g) { add_neighbor(g.data()); }
    // Writes the symmetrized inverse into out (m*m entries). `drift` receives
    // the asymmetry removed by symmetrization.
    void finish(cplx* out, double* drift = nullptr);
    void finish(MatrixC& out, double* drift = nullptr);

    int width() const { return m_; }

private:
    int m_;
    MatrixC base_;  // A - z
    double lambda_;
    MatrixC work_;
    SymInverter inverter_;
};

// Forward Green's matrix from exactly K children.
ComplexSymMatrix forward_step(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& V,
                              std::span<const ComplexSymMatrix> children);

// Root Green's matrix from exactly K+1 neighbours.
ComplexSymMatrix root_assemble(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& V,
                               std::span<const ComplexSymMatrix> neighbors);

// |B_L| = 1 + (K+1)(K^L - 1)/(K - 1).
std::size_t ball_size(int K, int L);

// Exact G_L(0,0;z) of the depth-L ball for the realization keyed by
// (seed, realization); site potentials come from site_potential() in
// breadth-first site order.
ComplexSymMatrix sample_tree(const SpectralPoint& z, const BetheStripModel& model, int depth, std::uint64_t seed,
                             std::uint64_t realization = 0);

// --- population dynamics --------------------------------------------------------

// Empirical law of the forward Green's matrix: `size` samples of m x m
// matrices, stored contiguously. The pool is a deterministic function of
// (model, z, seed, size, sweeps_done); `chunks` only partitions work.
struct PopulationPool {
    int m = 1;
    std::size_t size = 0;
    SpectralPoint z;
    std::uint64_t seed = 0;
    int sweeps_done = 0;
    int chunks = 64;
    std::vector<cplx> data;

    Eigen::Map<const MatrixC> view(std::size_t i) const {
        return Eigen::Map<const MatrixC>(data.data() + i * m * m, m, m);
    }
    ComplexSymMatrix sample(std::size_t i) const { return ComplexSymMatrix::from_dense(view(i)); }
    const cplx* raw(std::size_t i) const { return data.data() + i * m * m; }
};

// `size` copies of free_forward_green(z).
PopulationPool population_init(const SpectralPoint& z, const BetheStripModel& model, std::size_t size,
                               std::uint64_t seed, int chunks = 64);

// One generation: sample i of the new pool is forward_step with a fresh V and
// K parents drawn uniformly with replacement, all from the stream keyed by
// (seed, sweep index, i).
PopulationPool population_sweep(const PopulationPool& pool, const BetheStripModel& model, int workers = 0);
PopulationPool population_run(PopulationPool pool, const BetheStripModel& model, int sweeps, int workers = 0);

// Same samples, new spectral point (warm start for continuation in eta).
PopulationPool population_retarget(PopulationPool pool, const SpectralPoint& z);

struct GreenMoments {
    MatrixEstimate green;      // E G
    MatrixEstimate abs2;       // E conj(G) G
    RealEstimate trace_abs2;   // E Tr |G|^2
    RealEstimate dos;          // (1/(m pi)) Im E Tr G
};

// S root samples, each from K+1 pool draws and a fresh V. `key` separates
// repeated calls on the same pool.
GreenMoments estimate_green_moments(const PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                                    std::uint64_t key = 0, int workers = 0);
// Spreads the S root samples over `sweeps` further sweeps of the pool and
// batches by sweep blocks. A single pool carries O(1/sqrt(N)) fluctuations
// that a snapshot error bar cannot see; near the band they alternate in sign
// from sweep to sweep and average out over blocks.
GreenMoments measure_green_moments(PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                                   int sweeps, std::uint64_t key = 0, int workers = 0);
RealEstimate dos_density(const PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                         std::uint64_t key = 0, int workers = 0);

// Pool mean of exp((i/4) Tr(g M)).
ComplexEstimate zeta_estimate(const PopulationPool& pool, const RealSymMatrix& M);
// Pool mean of exp((i/4)(Tr(g M+) - Tr(conj(g) M-))).
ComplexEstimate xi_estimate(const PopulationPool& pool, const RealSymMatrix& Mp, const RealSymMatrix& Mm);

struct FixedPointResidual {
    double residual = 0.0;        // max over tests
    double combined_error = 0.0;  // combined standard error at the maximizing test
    std::vector<double> per_test;
    std::vector<double> per_test_error;
    std::vector<cplx> signed_difference;  // pool mean minus image mean, per test
};

// Weak stationarity check: the pool's characteristic function against the
// characteristic function of one more recursion step.
FixedPointResidual fixed_point_residual(const PopulationPool& pool, const BetheStripModel& model,
                                        std::span<const RealSymMatrix> tests, std::size_t samples,
                                        std::uint64_t key = 0, int workers = 0);

// Time-averaged version: the differences pool - image are accumulated over
// `sweeps` further sweeps (the pool advances) and batched by sweep blocks.
FixedPointResidual measure_fixed_point_residual(PopulationPool& pool, const BetheStripModel& model,
                                                std::span<const RealSymMatrix> tests, std::size_t samples, int sweeps,
                                                std::uint64_t key = 0, int workers = 0);

struct PopulationParams {
    std::size_t pool_size = 10000;
    int burn_in = 100;          // sweeps before the first eta level
    int sweeps_per_level = 100;  // sweeps after each warm start
    std::size_t samples = 10000;
    int measure_sweeps = 40;    // sweeps over which the samples are spread
    std::uint64_t seed = 1;
    int chunks = 64;
    int workers = 0;
};

struct EtaLevel {
    double eta = 0.0;
    GreenMoments moments;
};

// Population dynamics down a strictly decreasing eta schedule, each level
// warm-started from the previous pool. The first level must have eta > 0; a
// trailing 0 is admitted.
std::vector<EtaLevel> eta_continuation(const BetheStripModel& model, double E, std::span<const double> schedule,
                                       const PopulationParams& params);

}  // namespace bethe
