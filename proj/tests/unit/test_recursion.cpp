#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "bethestrip/errors.hpp"
#include "bethestrip/fixed_point.hpp"
#include "bethestrip/free_solver.hpp"
#include "bethestrip/recursion.hpp"

using namespace bethe;
using namespace std::complex_literals;

namespace {

BetheStripModel free_model(int K, std::vector<double> a) {
    const int m = static_cast<int>(a.size());
    return BetheStripModel(K, std::move(a), 0.0, GOE{m});
}

BetheStripModel point_model(int K, double lambda, double v) {
    RealSymMatrix v0(1, 1);
    v0 << v;
    return BetheStripModel(K, {0.0}, lambda, PointMass{v0});
}

double pool_deviation(const PopulationPool& pool, const ComplexSymMatrix& target) {
    double dev = 0.0;
    for (std::size_t i = 0; i < pool.size; ++i) dev = std::max(dev, max_abs(pool.view(i) - target.dense()));
    return dev;
}

RealSymMatrix zero(int m) { return RealSymMatrix::Zero(m, m); }

}  // namespace

TEST_CASE("forward_step closed forms") {
    const auto model = free_model(2, {0.0});
    const SpectralPoint z(0.0, 1.0);
    const cplx g = 1.0i * (std::sqrt(3.0) - 1.0);
    const std::vector<ComplexSymMatrix> fixed{ComplexSymMatrix::scalar(g), ComplexSymMatrix::scalar(g)};
    CHECK(std::abs(forward_step(z, model, zero(1), fixed)(0, 0) - g) < 1e-14);
    const std::vector<ComplexSymMatrix> leaves{ComplexSymMatrix::scalar(0.0), ComplexSymMatrix::scalar(0.0)};
    CHECK(std::abs(forward_step(z, model, zero(1), leaves)(0, 0) - 1.0i) < 1e-15);

    CHECK_THROWS_AS(forward_step(z, model, zero(1), std::span(fixed).first(1)), ConfigError);
}

TEST_CASE("forward_step decouples diagonal inputs at lambda = 0") {
    const auto model = free_model(3, {-0.5, 0.25});
    const SpectralPoint z(0.2, 0.3);
    const std::vector<ComplexSymMatrix> kids(3, ComplexSymMatrix::diagonal({0.1 + 0.4i, -0.2 + 0.7i}));
    const auto out = forward_step(z, model, zero(2), kids);
    CHECK(out.is_diagonal());
    for (int k = 0; k < 2; ++k) {
        const cplx expect = 1.0 / (model.a()[k] - z.z() - 0.75 * kids[0](k, k));
        CHECK(std::abs(out(k, k) - expect) < 1e-15);
    }
}

TEST_CASE("root_assemble") {
    const auto model = free_model(2, {0.0});
    const SpectralPoint z(0.0, 1.0);
    const std::vector<ComplexSymMatrix> nb(3, ComplexSymMatrix::scalar(1.0i * (std::sqrt(3.0) - 1.0)));
    CHECK(std::abs(root_assemble(z, model, zero(1), nb)(0, 0) - 4.0i / (1.0 + 3.0 * std::sqrt(3.0))) < 1e-14);
    CHECK_THROWS_AS(root_assemble(z, model, zero(1), std::span(nb).first(2)), ConfigError);

    const auto pair = free_model(3, {-0.5, 0.5});
    const SpectralPoint w(0.4, 0.2);
    const std::vector<ComplexSymMatrix> fnb(4, free_forward_green(w, pair));
    CHECK(max_abs(root_assemble(w, pair, zero(2), fnb).dense() - free_full_green(w, pair).dense()) < 1e-14);

    // point mass: neighbours at the converged forward fixed point
    const auto pm = point_model(2, 1.0, 1.0);
    const FixedPointProblem problem(pm, z, free_forward_green(z, free_model(2, {0.0})));
    const cplx gstar = hybrid_solve(problem).solution(0, 0);
    const std::vector<ComplexSymMatrix> pnb(3, ComplexSymMatrix::scalar(gstar));
    RealSymMatrix V(1, 1);
    V << 1.0;
    const cplx expect = 1.0 / (1.0 - 1.0i - 0.75 * gstar);
    CHECK(std::abs(root_assemble(z, pm, V, pnb)(0, 0) - expect) < 1e-14);
}

TEST_CASE("ball_size") {
    CHECK(ball_size(2, 0) == 1);
    CHECK(ball_size(2, 2) == 10);
    CHECK(ball_size(3, 2) == 17);
}

TEST_CASE("sample_tree: single site and free convergence") {
    const auto model = BetheStripModel(2, {-0.5, 0.5}, 0.7, GOE{2});
    const SpectralPoint z(0.1, 0.2);
    const auto g0 = sample_tree(z, model, 0, 3, 5);
    MatrixC h = model.lambda() * site_potential(model.ensemble(), 3, 5, 0).cast<cplx>();
    h.diagonal() += Eigen::VectorXcd::LinSpaced(2, -0.5, 0.5) - Eigen::VectorXcd::Constant(2, z.z());
    CHECK(max_abs(g0.dense() - MatrixC(h.inverse())) < 1e-14);

    const auto free = free_model(2, {0.0});
    const SpectralPoint w(0.3, 0.5);
    const cplx target = free_full_green(w, free)(0, 0);
    double prev = 1e300;
    for (int L = 0; L <= 12; L += 3) {
        const double err = std::abs(sample_tree(w, free, L, 1, 0)(0, 0) - target);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 5e-4);
    CHECK_THROWS_AS(sample_tree(SpectralPoint(0.1, 0.0), free, 2, 1, 0), ConfigError);
}

TEST_CASE("population_init") {
    const auto model = free_model(2, {0.0});
    const SpectralPoint z(0.0, 1.0);
    const auto pool = population_init(z, model, 3, 1);
    CHECK(pool.size == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pool.view(i)(0, 0) - 1.0i * (std::sqrt(3.0) - 1.0)) < 1e-15);
    CHECK_THROWS_AS(population_init(z, model, 1, 1), ConfigError);
}

TEST_CASE("population_sweep at lambda = 0 is stationary") {
    const auto model = free_model(2, {-0.5, 0.5});
    const SpectralPoint z(0.3, 0.05);
    const auto pool = population_run(population_init(z, model, 64, 4, 8), model, 5);
    CHECK(pool.sweeps_done == 5);
    CHECK(pool_deviation(pool, free_forward_green(z, model)) < 1e-12);
}

TEST_CASE("population_sweep collapses onto the point-mass fixed point") {
    const auto model = point_model(2, 1.0, 1.0);
    const SpectralPoint z(0.0, 1.0);
    const auto pool = population_run(population_init(z, model, 100, 2, 8), model, 100);
    const FixedPointProblem problem(model, z, pool.sample(0));
    const auto fp = newton_solve(problem);
    CHECK(pool_deviation(pool, fp.solution) < 1e-10);
}

TEST_CASE("population results do not depend on worker count or chunking") {
    const BetheStripModel model(2, {-0.5, 0.5}, 0.3, GOE{2});
    const SpectralPoint z(0.2, 0.05);
    const auto a = population_run(population_init(z, model, 300, 9, 7), model, 4, 1);
    const auto b = population_run(population_init(z, model, 300, 9, 31), model, 4, 3);
    CHECK(a.data == b.data);
    const auto ma = estimate_green_moments(a, model, 500, 0, 1);
    const auto mb = estimate_green_moments(b, model, 500, 0, 4);
    CHECK(ma.dos.mean == mb.dos.mean);
    CHECK(ma.trace_abs2.std_error == mb.trace_abs2.std_error);
}

TEST_CASE("population retains the Herglotz property") {
    const BetheStripModel model(3, {-0.5, 0.0, 0.5}, 1.0, GOE{3});
    const SpectralPoint z(0.4, 0.01);
    const auto pool = population_run(population_init(z, model, 200, 5), model, 30);
    for (std::size_t i = 0; i < pool.size; ++i) {
        CHECK(min_imag_eigenvalue(pool.sample(i)) >= -1e-10);
        CHECK(spectral_norm(pool.view(i)) <= 1.0 / z.eta * (1.0 + 1e-12));
    }
}

TEST_CASE("GOE pool reaches a stationary law") {
    const BetheStripModel model(2, {-0.5, 0.5}, 0.1, GOE{2});
    const SpectralPoint z(0.2, 1e-2);
    auto estimate = [&](std::uint64_t seed) {
        auto pool = population_run(population_init(z, model, 2000, seed), model, 100);
        return measure_green_moments(pool, model, 4000, 40).dos;
    };
    const RealEstimate a = estimate(1), b = estimate(2);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("moments at lambda = 0 are the free values") {
    const auto model = free_model(2, {-0.5, 0.5});
    const SpectralPoint z(0.1, 0.02);
    const auto pool = population_init(z, model, 50, 1);
    const auto mo = estimate_green_moments(pool, model, 100);
    const auto full = free_full_green(z, model);
    CHECK(max_abs(mo.green.mean - full.dense()) < 1e-14);
    CHECK(mo.green.std_error.maxCoeff() < 1e-14);
    MatrixC abs2 = full.dense().conjugate() * full.dense();
    CHECK(max_abs(mo.abs2.mean - abs2) < 1e-14);
    CHECK(std::abs(mo.abs2.mean(0, 1)) < 1e-15);
    const double dos = (full(0, 0).imag() + full(1, 1).imag()) / (2.0 * std::numbers::pi);
    CHECK(std::abs(mo.dos.mean - dos) < 1e-14);

    const auto one = free_model(2, {0.0});
    const auto p1 = population_init(SpectralPoint(0.0, 1e-6), one, 10, 1);
    CHECK(std::abs(dos_density(p1, one, 10).mean - 4.0 / (3.0 * std::sqrt(2.0) * std::numbers::pi)) < 1e-6);
}

TEST_CASE("density vanishes far from the spectrum") {
    const BetheStripModel model(2, {-0.5, 0.5}, 0.2, DiagonalIID{DiagonalIID::Law::uniform, 2});
    const SpectralPoint z(4.0, 1e-3);
    const auto pool = population_run(population_init(z, model, 500, 3), model, 20);
    CHECK(std::abs(dos_density(pool, model, 500).mean) < 1e-3);
}

TEST_CASE("zeta and xi estimates") {
    const auto model = free_model(2, {-0.5, 0.5});
    const SpectralPoint z(0.1, 0.02);
    const auto pool = population_init(z, model, 40, 1);
    RealSymMatrix M(2, 2);
    M << 1.0, 0.3, 0.3, 0.5;
    const RealSymMatrix Z = RealSymMatrix::Zero(2, 2);
    const auto z0 = zeta_estimate(pool, Z);
    CHECK(z0.mean == cplx(1.0));
    CHECK(z0.std_error == 0.0);
    CHECK(std::abs(zeta_estimate(pool, M).mean - zeta_free(z, model, M)) < 1e-14);
    CHECK(std::abs(xi_estimate(pool, Z, Z).mean - 1.0) < 1e-15);
    CHECK(std::abs(xi_estimate(pool, M, 0.5 * M).mean - xi_free(z, model, M, 0.5 * M)) < 1e-14);

    const BetheStripModel goe(2, {-0.5, 0.5}, 0.5, GOE{2});
    const auto gp = population_run(population_init(z, goe, 400, 2), goe, 10);
    const auto zm = zeta_estimate(gp, M);
    CHECK(std::abs(zm.mean) <= 1.0 + 3.0 * zm.std_error);
    CHECK(std::abs(xi_estimate(gp, M, Z).mean - zm.mean) < 1e-14);
}

TEST_CASE("weak fixed-point residual") {
    RealSymMatrix M(1, 1);
    M << 1.0;
    const std::vector<RealSymMatrix> tests{M, 2.0 * M};
    const auto model = free_model(2, {0.0});
    const SpectralPoint z(0.2, 0.1);
    const auto r = fixed_point_residual(population_init(z, model, 50, 1), model, tests, 200);
    CHECK(r.residual < 1e-12);
    CHECK(r.per_test.size() == 2);
}

TEST_CASE("time-averaged weak residual for GOE disorder") {
    const BetheStripModel model(2, {-0.5, 0.5}, 0.1, GOE{2});
    const SpectralPoint z(0.3, 0.05);
    Stream rng(99, {stream_tag::test});
    std::vector<RealSymMatrix> tests;
    for (int t = 0; t < 4; ++t) {
        RealSymMatrix B(2, 2);
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) B(j, k) = rng.normal();
        tests.push_back(B * B.transpose());
    }
    auto pool = population_run(population_init(z, model, 2000, 3), model, 100);
    const auto r = measure_fixed_point_residual(pool, model, tests, 2000, 20);
    CHECK(pool.sweeps_done == 120);
    CHECK(r.per_test.size() == 4);
    CHECK(r.residual < 4.0 * r.combined_error);
}

TEST_CASE("eta_continuation at lambda = 0 tracks the free values") {
    const auto model = free_model(2, {-0.5, 0.5});
    PopulationParams p;
    p.pool_size = 20;
    p.burn_in = 2;
    p.sweeps_per_level = 2;
    p.samples = 40;
    const std::vector<double> schedule{1.0, 0.1, 0.01};
    const auto levels = eta_continuation(model, 0.3, schedule, p);
    REQUIRE(levels.size() == 3);
    for (const auto& level : levels)
        CHECK(max_abs(level.moments.green.mean - free_full_green(SpectralPoint(0.3, level.eta), model).dense()) <
              1e-10);
    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS_AS(eta_continuation(model, 0.3, bad, p), ConfigError);
}
