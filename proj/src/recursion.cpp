#include "bethestrip/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bethestrip/errors.hpp"
#include "bethestrip/free_solver.hpp"
#include "bethestrip/parallel.hpp"

namespace bethe {

// --- StepKernel -------------------------------------------------------------

StepKernel::StepKernel(const BetheStripModel& model, const SpectralPoint& z)
    : m_(model.m()), base_(MatrixC::Zero(m_, m_)), lambda_(model.lambda()), work_(m_, m_), inverter_(m_) {
    for (int k = 0; k < m_; ++k) base_(k, k) = model.a()[k] - z.z();
}

void StepKernel::begin(const RealSymMatrix& V) {
    work_ = base_;
    if (lambda_ != 0.0) work_ += lambda_ * V.cast<cplx>();
}

void StepKernel::add_neighbor(const cplx* g) {
    for (int k = 0; k < m_ * m_; ++k) work_.data()[k] -= 0.25 * g[k];
}

void StepKernel::finish(cplx* out, double* drift) {
    inverter_.invert(work_, drift);
    std::copy(work_.data(), work_.data() + m_ * m_, out);
}

void StepKernel::finish(MatrixC& out, double* drift) {
    out.resize(m_, m_);
    finish(out.data(), drift);
}

namespace {

ComplexSymMatrix assemble(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& V,
                          std::span<const ComplexSymMatrix> neighbors) {
    if (V.rows() != model.m() || V.cols() != model.m()) throw ConfigError("potential has wrong size");
    StepKernel kernel(model, z);
    kernel.begin(V);
    for (const auto& g : neighbors) {
        if (g.dim() != model.m()) throw ConfigError("neighbour Green's matrix has wrong size");
        kernel.add_neighbor(g.dense());
    }
    MatrixC out;
    kernel.finish(out);
    return ComplexSymMatrix::from_dense(out);
}

void check_pool(const PopulationPool& pool, const BetheStripModel& model) {
    if (pool.m != model.m()) throw ConfigError("pool width does not match model");
    if (pool.size < 2 || pool.data.size() != pool.size * pool.m * pool.m) throw ConfigError("malformed pool");
}

cplx trace_product(const cplx* g, const RealSymMatrix& M, int m) {
    cplx tr = 0.0;
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) tr += g[c * m + r] * M(c, r);
    return tr;
}

cplx trace_conj_product(const cplx* g, const RealSymMatrix& M, int m) {
    cplx tr = 0.0;
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) tr += std::conj(g[c * m + r]) * M(c, r);
    return tr;
}

}  // namespace

ComplexSymMatrix forward_step(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& V,
                              std::span<const ComplexSymMatrix> children) {
    if (static_cast<int>(children.size()) != model.K()) throw ConfigError("forward_step needs exactly K children");
    return assemble(z, model, V, children);
}

ComplexSymMatrix root_assemble(const SpectralPoint& z, const BetheStripModel& model, const RealSymMatrix& V,
                               std::span<const ComplexSymMatrix> neighbors) {
    if (static_cast<int>(neighbors.size()) != model.K() + 1)
        throw ConfigError("root_assemble needs exactly K+1 neighbours");
    return assemble(z, model, V, neighbors);
}

std::size_t ball_size(int K, int L) {
    std::size_t total = 1;
    std::size_t level = K + 1;
    for (int l = 1; l <= L; ++l) {
        total += level;
        level *= K;
    }
    return total;
}

ComplexSymMatrix sample_tree(const SpectralPoint& z, const BetheStripModel& model, int depth, std::uint64_t seed,
                             std::uint64_t realization) {
    if (depth < 0) throw ConfigError("depth must be >= 0");
    if (z.eta <= 0.0) throw ConfigError("sample_tree requires eta > 0");
    const int m = model.m();
    const int K = model.K();
    const std::size_t mm = static_cast<std::size_t>(m) * m;
    StepKernel kernel(model, z);
    const auto& ens = model.ensemble();

    // breadth-first numbering: level l >= 1 holds (K+1) K^{l-1} sites, and the
    // children of its j-th site are sites j*K .. j*K+K-1 of level l+1
    std::vector<std::size_t> offset(depth + 2, 1), count(depth + 2, 0);
    count[0] = 1;
    offset[0] = 0;
    if (depth >= 1) count[1] = K + 1;
    for (int l = 2; l <= depth; ++l) count[l] = count[l - 1] * K;
    for (int l = 2; l <= depth; ++l) offset[l] = offset[l - 1] + count[l - 1];

    std::vector<cplx> below, current;
    for (int l = depth; l >= 1; --l) {
        current.assign(count[l] * mm, 0.0);
        for (std::size_t j = 0; j < count[l]; ++j) {
            kernel.begin(site_potential(ens, seed, realization, offset[l] + j));
            if (l < depth)
                for (int c = 0; c < K; ++c) kernel.add_neighbor(below.data() + (j * K + c) * mm);
            kernel.finish(current.data() + j * mm);
        }
        below.swap(current);
    }
    kernel.begin(site_potential(ens, seed, realization, 0));
    if (depth >= 1)
        for (int c = 0; c <= K; ++c) kernel.add_neighbor(below.data() + c * mm);
    MatrixC root;
    kernel.finish(root);
    return ComplexSymMatrix::from_dense(root);
}

// --- population dynamics ----------------------------------------------------

PopulationPool population_init(const SpectralPoint& z, const BetheStripModel& model, std::size_t size,
                               std::uint64_t seed, int chunks) {
    if (size < 2) throw ConfigError("population size must be >= 2");
    if (chunks < 1) throw ConfigError("chunk count must be >= 1");
    const ComplexSymMatrix g = free_forward_green(z, model);
    PopulationPool pool;
    pool.m = model.m();
    pool.size = size;
    pool.z = z;
    pool.seed = seed;
    pool.sweeps_done = 0;
    pool.chunks = chunks;
    const std::size_t mm = static_cast<std::size_t>(pool.m) * pool.m;
    pool.data.resize(size * mm);
    for (std::size_t i = 0; i < size; ++i) std::copy(g.dense().data(), g.dense().data() + mm, pool.data.data() + i * mm);
    return pool;
}

PopulationPool population_sweep(const PopulationPool& pool, const BetheStripModel& model, int workers) {
    check_pool(pool, model);
    PopulationPool next = pool;
    const std::size_t mm = static_cast<std::size_t>(pool.m) * pool.m;
    const auto sweep = static_cast<std::uint64_t>(pool.sweeps_done);
    parallel_chunks(pool.size, pool.chunks, workers, [&](std::size_t lo, std::size_t hi) {
        StepKernel kernel(model, pool.z);
        for (std::size_t i = lo; i < hi; ++i) {
            Stream rng(pool.seed, {stream_tag::sweep, sweep, i});
            kernel.begin(sample_potential(model.ensemble(), rng));
            for (int c = 0; c < model.K(); ++c) kernel.add_neighbor(pool.raw(rng.below(pool.size)));
            kernel.finish(next.data.data() + i * mm);
        }
    });
    next.sweeps_done = pool.sweeps_done + 1;
    return next;
}

PopulationPool population_run(PopulationPool pool, const BetheStripModel& model, int sweeps, int workers) {
    for (int s = 0; s < sweeps; ++s) pool = population_sweep(pool, model, workers);
    return pool;
}

PopulationPool population_retarget(PopulationPool pool, const SpectralPoint& z) {
    pool.z = z;
    return pool;
}

namespace {

struct RootSamples {
    std::vector<cplx> greens, squares;
    std::vector<double> tr2, dos;

    RootSamples(std::size_t n, int m) : greens(n * m * m), squares(n * m * m), tr2(n), dos(n) {}
    GreenMoments moments(int m, int batches) const {
        return {batch_means(greens, m, m, batches), batch_means(squares, m, m, batches), batch_means(tr2, batches),
                batch_means(dos, batches)};
    }
};

// Root samples [offset, offset + count) of `out`, drawn from the current pool.
void draw_roots(const PopulationPool& pool, const BetheStripModel& model, std::size_t offset, std::size_t count,
                std::uint64_t key, int workers, RootSamples& out) {
    const int m = pool.m;
    const std::size_t mm = static_cast<std::size_t>(m) * m;
    const double dos_scale = 1.0 / (m * std::numbers::pi);
    const auto sweep = static_cast<std::uint64_t>(pool.sweeps_done);
    parallel_chunks(count, pool.chunks, workers, [&](std::size_t lo, std::size_t hi) {
        StepKernel kernel(model, pool.z);
        MatrixC g(m, m);
        for (std::size_t i = lo; i < hi; ++i) {
            Stream rng(pool.seed, {stream_tag::root_draw, key, sweep, i});
            kernel.begin(sample_potential(model.ensemble(), rng));
            for (int c = 0; c <= model.K(); ++c) kernel.add_neighbor(pool.raw(rng.below(pool.size)));
            kernel.finish(g);
            const std::size_t j = offset + i;
            Eigen::Map<MatrixC>(out.greens.data() + j * mm, m, m) = g;
            Eigen::Map<MatrixC>(out.squares.data() + j * mm, m, m) = g.conjugate() * g;
            out.tr2[j] = g.squaredNorm();
            out.dos[j] = dos_scale * g.trace().imag();
        }
    });
}

}  // namespace

GreenMoments estimate_green_moments(const PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                                    std::uint64_t key, int workers) {
    check_pool(pool, model);
    if (samples < 1) throw ConfigError("sample count must be >= 1");
    RootSamples out(samples, pool.m);
    draw_roots(pool, model, 0, samples, key, workers, out);
    return out.moments(pool.m, default_batches);
}

GreenMoments measure_green_moments(PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                                   int sweeps, std::uint64_t key, int workers) {
    check_pool(pool, model);
    if (samples < 1) throw ConfigError("sample count must be >= 1");
    if (sweeps < 1) throw ConfigError("measurement needs at least one sweep");
    RootSamples out(samples, pool.m);
    const auto S = static_cast<std::size_t>(sweeps);
    for (std::size_t s = 0; s < S; ++s) {
        pool = population_sweep(pool, model, workers);
        const std::size_t lo = s * samples / S, hi = (s + 1) * samples / S;
        if (hi > lo) draw_roots(pool, model, lo, hi - lo, key, workers, out);
    }
    // batches follow sweep blocks, so pool-level fluctuations enter the error
    return out.moments(pool.m, std::min(sweeps, default_batches));
}

RealEstimate dos_density(const PopulationPool& pool, const BetheStripModel& model, std::size_t samples,
                         std::uint64_t key, int workers) {
    return estimate_green_moments(pool, model, samples, key, workers).dos;
}

ComplexEstimate zeta_estimate(const PopulationPool& pool, const RealSymMatrix& M) {
    if (M.rows() != pool.m) throw ConfigError("test matrix has wrong size");
    std::vector<cplx> values(pool.size);
    for (std::size_t i = 0; i < pool.size; ++i)
        values[i] = std::exp(cplx(0.0, 0.25) * trace_product(pool.raw(i), M, pool.m));
    return batch_means(values);
}

ComplexEstimate xi_estimate(const PopulationPool& pool, const RealSymMatrix& Mp, const RealSymMatrix& Mm) {
    if (Mp.rows() != pool.m || Mm.rows() != pool.m) throw ConfigError("test matrix has wrong size");
    std::vector<cplx> values(pool.size);
    for (std::size_t i = 0; i < pool.size; ++i) {
        const cplx phase = trace_product(pool.raw(i), Mp, pool.m) - trace_conj_product(pool.raw(i), Mm, pool.m);
        values[i] = std::exp(cplx(0.0, 0.25) * phase);
    }
    return batch_means(values);
}

FixedPointResidual fixed_point_residual(const PopulationPool& pool, const BetheStripModel& model,
                                        std::span<const RealSymMatrix> tests, std::size_t samples,
                                        std::uint64_t key, int workers) {
    check_pool(pool, model);
    if (samples < 1) throw ConfigError("sample count must be >= 1");
    const int m = pool.m;
    const std::size_t mm = static_cast<std::size_t>(m) * m;
    std::vector<cplx> fresh(samples * mm);
    const auto sweep = static_cast<std::uint64_t>(pool.sweeps_done);
    parallel_chunks(samples, pool.chunks, workers, [&](std::size_t lo, std::size_t hi) {
        StepKernel kernel(model, pool.z);
        for (std::size_t i = lo; i < hi; ++i) {
            Stream rng(pool.seed, {stream_tag::forward_draw, key, sweep, i});
            kernel.begin(sample_potential(model.ensemble(), rng));
            for (int c = 0; c < model.K(); ++c) kernel.add_neighbor(pool.raw(rng.below(pool.size)));
            kernel.finish(fresh.data() + i * mm);
        }
    });

    FixedPointResidual out;
    for (const auto& M : tests) {
        const ComplexEstimate lhs = zeta_estimate(pool, M);
        std::vector<cplx> values(samples);
        for (std::size_t i = 0; i < samples; ++i)
            values[i] = std::exp(cplx(0.0, 0.25) * trace_product(fresh.data() + i * mm, M, m));
        const ComplexEstimate rhs = batch_means(values);
        out.signed_difference.push_back(lhs.mean - rhs.mean);
        const double r = std::abs(lhs.mean - rhs.mean);
        const double e = std::hypot(lhs.std_error, rhs.std_error);
        out.per_test.push_back(r);
        out.per_test_error.push_back(e);
        if (out.per_test.size() == 1 || r > out.residual) {
            out.residual = r;
            out.combined_error = e;
        }
    }
    return out;
}

FixedPointResidual measure_fixed_point_residual(PopulationPool& pool, const BetheStripModel& model,
                                                std::span<const RealSymMatrix> tests, std::size_t samples, int sweeps,
                                                std::uint64_t key, int workers) {
    check_pool(pool, model);
    if (sweeps < 1) throw ConfigError("measurement needs at least one sweep");
    const std::size_t T = tests.size();
    std::vector<std::vector<cplx>> diffs(T);
    for (int s = 0; s < sweeps; ++s) {
        const FixedPointResidual r = fixed_point_residual(pool, model, tests, samples, key, workers);
        for (std::size_t t = 0; t < T; ++t) diffs[t].push_back(r.signed_difference[t]);
        pool = population_sweep(pool, model, workers);
    }
    FixedPointResidual out;
    for (std::size_t t = 0; t < T; ++t) {
        const ComplexEstimate d = batch_means(diffs[t], std::min(sweeps, default_batches));
        const double r = std::abs(d.mean);
        out.per_test.push_back(r);
        out.per_test_error.push_back(d.std_error);
        if (t == 0 || r > out.residual) {
            out.residual = r;
            out.combined_error = d.std_error;
        }
    }
    return out;
}

std::vector<EtaLevel> eta_continuation(const BetheStripModel& model, double E, std::span<const double> schedule,
                                       const PopulationParams& params) {
    if (schedule.empty()) throw ConfigError("eta schedule is empty");
    if (!(schedule[0] > 0.0)) throw ConfigError("eta schedule must start with eta > 0");
    for (std::size_t k = 1; k < schedule.size(); ++k)
        if (!(schedule[k] < schedule[k - 1]) || schedule[k] < 0.0)
            throw ConfigError("eta schedule must be strictly decreasing and non-negative");

    std::vector<EtaLevel> out;
    PopulationPool pool = population_init(SpectralPoint(E, schedule[0]), model, params.pool_size, params.seed,
                                          params.chunks);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const SpectralPoint z(E, schedule[k]);
        // without disorder the free solution is exactly stationary at every eta
        if (k > 0 && model.lambda() == 0.0) {
            PopulationPool fresh = population_init(z, model, params.pool_size, params.seed, params.chunks);
            fresh.sweeps_done = pool.sweeps_done;
            pool = std::move(fresh);
        } else if (k > 0) {
            pool = population_retarget(std::move(pool), z);
        }
        pool = population_run(std::move(pool), model, k == 0 ? params.burn_in : params.sweeps_per_level,
                              params.workers);
        out.push_back({schedule[k], measure_green_moments(pool, model, params.samples, params.measure_sweeps, k,
                                                          params.workers)});
    }
    return out;
}

}  // namespace bethe
