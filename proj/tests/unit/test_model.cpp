#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bethestrip/errors.hpp"
#include "bethestrip/model.hpp"

using namespace bethe;

namespace {

BetheStripModel free_model(int K, std::vector<double> a) {
    const int m = static_cast<int>(a.size());
    return BetheStripModel(K, std::move(a), 0.0, GOE{m});
}

// Eigenvalues of half the adjacency matrix of an m-cycle, ascending.
std::vector<double> cycle_spectrum(int m) {
    std::vector<double> a;
    for (int k = 0; k < m; ++k) a.push_back(std::cos(2.0 * std::numbers::pi * k / m));
    std::sort(a.begin(), a.end());
    return a;
}

}  // namespace

TEST_CASE("interval_iak") {
    const double r2 = std::sqrt(2.0);
    auto i2 = interval_iak(free_model(2, {-0.5, 0.5}));
    CHECK(i2.lo == doctest::Approx(-r2 + 0.5));
    CHECK(i2.hi == doctest::Approx(r2 - 0.5));
    auto i4 = interval_iak(free_model(4, {0.0}));
    CHECK(i4.lo == doctest::Approx(-2.0));
    CHECK(i4.hi == doctest::Approx(2.0));
    CHECK(interval_iak(free_model(2, {-2.0, 2.0})).empty());
}

TEST_CASE("interval_iak for cycle strips") {
    const double K = 3.0, rk = std::sqrt(K);
    auto i3 = interval_iak(free_model(3, cycle_spectrum(3)));
    CHECK(i3.lo == doctest::Approx(-rk + 1.0));
    CHECK(i3.hi == doctest::Approx(rk + std::cos(2.0 * std::numbers::pi / 3.0)));
    auto i4 = interval_iak(free_model(3, cycle_spectrum(4)));
    CHECK(i4.lo == doctest::Approx(-rk + 1.0));
    CHECK(i4.hi == doctest::Approx(rk - 1.0));
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(free_model(1, {0.0}), ConfigError);
    CHECK_THROWS_AS(free_model(2, {0.5, -0.5}), ConfigError);
    CHECK_THROWS_AS(BetheStripModel(2, {0.0, 1.0}, 0.1, GOE{3}), ConfigError);
    RealSymMatrix asym(2, 2);
    asym << 0, 1, 2, 0;
    CHECK_THROWS_AS(BetheStripModel(2, {0.0, 1.0}, 0.1, PointMass{asym}), ConfigError);
    CHECK_NOTHROW(free_model(2, {-2.0, 2.0}));
}

TEST_CASE("sample_potential: point mass and GOE moments") {
    RealSymMatrix v0 = RealSymMatrix::Zero(2, 2);
    v0(0, 0) = 1.0;
    v0(1, 1) = 2.0;
    Stream s(1, {stream_tag::test});
    for (int k = 0; k < 5; ++k) CHECK(sample_potential(PointMass{v0}, s) == v0);

    const int n = 100000;
    double m00 = 0, m01 = 0, v00 = 0, v01 = 0;
    for (int k = 0; k < n; ++k) {
        const RealSymMatrix V = sample_potential(GOE{2}, s);
        CHECK(V(0, 1) == V(1, 0));
        m00 += V(0, 0);
        m01 += V(0, 1);
        v00 += V(0, 0) * V(0, 0);
        v01 += V(0, 1) * V(0, 1);
    }
    m00 /= n, m01 /= n, v00 /= n, v01 /= n;
    CHECK(std::abs(m00) < 3.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(m01) < 3.0 * std::sqrt(0.5 / n));
    // Var of x^2 for N(0, s^2) is 2 s^4
    CHECK(std::abs(v00 - 1.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(v01 - 0.5) < 3.0 * std::sqrt(2.0 * 0.25 / n));
}

TEST_CASE("characteristic_fn against Monte Carlo") {
    RealSymMatrix M(2, 2);
    M << 0.7, -0.3, -0.3, 0.4;
    for (const DisorderEnsemble& ens : {DisorderEnsemble{GOE{2}},
                                        DisorderEnsemble{DiagonalIID{DiagonalIID::Law::uniform, 2}},
                                        DisorderEnsemble{DiagonalIID{DiagonalIID::Law::gauss, 2}},
                                        DisorderEnsemble{DiagonalIID{DiagonalIID::Law::bernoulli, 2}}}) {
        CHECK(std::abs(characteristic_fn(ens, RealSymMatrix::Zero(2, 2)) - 1.0) < 1e-15);
        Stream s(9, {stream_tag::test});
        const int n = 100000;
        cplx acc = 0;
        for (int k = 0; k < n; ++k) {
            const RealSymMatrix V = sample_potential(ens, s);
            acc += std::exp(cplx(0.0, -(M * V).trace()));
        }
        acc /= double(n);
        CHECK(std::abs(acc - characteristic_fn(ens, M)) < 4.0 / std::sqrt(n));
    }
    RealSymMatrix v0(1, 1);
    v0 << 1.5;
    RealSymMatrix m1(1, 1);
    m1 << 0.8;
    CHECK(std::abs(characteristic_fn(PointMass{v0}, m1) - std::exp(cplx(0.0, -1.2))) < 1e-15);
    CHECK(std::abs(characteristic_fn(GOE{2}, M) - std::exp(-(M * M).trace() / 2.0)) < 1e-15);
}

TEST_CASE("deterministic_spectrum") {
    auto s = deterministic_spectrum(free_model(4, {0.0}));
    REQUIRE(s.size() == 1);
    CHECK(s[0].lo == doctest::Approx(-2.0));
    CHECK(s[0].hi == doctest::Approx(2.0));

    s = deterministic_spectrum(free_model(2, {-0.5, 0.5}));
    REQUIRE(s.size() == 1);
    CHECK(s[0].lo == doctest::Approx(-std::sqrt(2.0) - 0.5));
    CHECK(s[0].hi == doctest::Approx(std::sqrt(2.0) + 0.5));

    RealSymMatrix v0(1, 1);
    v0 << 1.0;
    s = deterministic_spectrum(BetheStripModel(4, {0.0}, 1.0, PointMass{v0}));
    REQUIRE(s.size() == 1);
    CHECK(s[0].lo == doctest::Approx(-1.0));
    CHECK(s[0].hi == doctest::Approx(3.0));

    CHECK_THROWS_AS(deterministic_spectrum(BetheStripModel(2, {0.0}, 0.1, GOE{1})), UnsupportedEnsemble);
}

TEST_CASE("parse_ensemble") {
    CHECK(ensemble_dim(parse_ensemble("goe", 3)) == 3);
    CHECK(std::holds_alternative<DiagonalIID>(parse_ensemble("diag:bernoulli", 2)));
    const auto pm = parse_ensemble("point:1,0.5;0.5,2", 2);
    REQUIRE(std::holds_alternative<PointMass>(pm));
    CHECK(std::get<PointMass>(pm).v0(0, 1) == 0.5);
    CHECK_THROWS_AS(parse_ensemble("cauchy", 2), ConfigError);
    CHECK_THROWS_AS(parse_ensemble("point:1,2;3,4", 2), ConfigError);
}

TEST_CASE("site potentials are keyed by site and realization") {
    const auto a = site_potential(GOE{2}, 4, 0, 7);
    CHECK(a == site_potential(GOE{2}, 4, 0, 7));
    CHECK(a != site_potential(GOE{2}, 4, 1, 7));
    CHECK(a != site_potential(GOE{2}, 4, 0, 8));
}
