#include <doctest.h>

#include <cmath>

#include "warpflow/errors.hpp"
#include "warpflow/soliton.hpp"

using namespace warpflow;

TEST_CASE("cylinder shot: rho = r, f = r^2/4, v = sqrt 2, residuals <= 1e-8 on [0,20]") {
    const SolitonShot s = shoot(std::sqrt(2.0), 20.0);
    CHECK(s.classification == SolitonClass::Cylinder);
    CHECK(s.r_end == doctest::Approx(20.0));
    CHECK(s.residuals.a2_lambda2 <= 1e-8);
    CHECK(s.residuals.a2_b1 <= 1e-8);
    CHECK(s.residuals.fp_vp <= 1e-8);
    CHECK(s.residuals.tf_hessian <= 1e-8);
    for (std::size_t i = 0; i < s.r.size(); ++i) {
        CHECK(std::abs(s.v[i] - std::sqrt(2.0)) <= 1e-12);
        CHECK(std::abs(s.rho[i] - s.r[i]) <= 1e-12);
        CHECK(std::abs(s.f_p[i] - s.r[i] / 2.0) <= 1e-12);
    }
    CHECK(s.normalization_residual <= 1e-8);
}

TEST_CASE("off-cylinder shot fails before r = 50") {
    const SolitonShot s = shoot(1.0, 50.0);
    CHECK(s.classification != SolitonClass::Cylinder);
    CHECK(s.r_end < 50.0);
}

TEST_CASE("nonpositive v0 is a precondition error") {
    CHECK_THROWS_AS(shoot(0.0, 10.0), InvalidConfig);
    CHECK_THROWS_AS(shoot(-1.0, 10.0), InvalidConfig);
    CHECK_THROWS_AS(shoot(1.0, 200.0), InvalidConfig);
}

TEST_CASE("identity_residuals on synthetic analytic cylinder data is exact") {
    SolitonShot s;
    s.v0 = std::sqrt(2.0);
    const int n = 400;
    const double h = 0.05;
    for (int i = 1; i <= n; ++i) {
        const double r = i * h;
        s.r.push_back(r);
        s.rho.push_back(r);
        s.rho_p.push_back(1.0);
        s.v.push_back(std::sqrt(2.0));
        s.v_p.push_back(0.0);
        s.f_p.push_back(r / 2.0);
        s.f.push_back(r * r / 4.0);
    }
    const SolitonResiduals res = identity_residuals(s);
    CHECK(res.a2_lambda2 <= 1e-15);
    CHECK(res.a2_b1 == 0.0);
    CHECK(res.fp_vp == 0.0);
    CHECK(res.tf_hessian <= 1e-26);  // exact modulo one rounding in the f'' difference
    CHECK(res.soliton_eq <= 1e-12);
}

TEST_CASE("perturbed constant state: |a2 + lambda2 - 1/2| = |1/v^2 - 1/2|") {
    SolitonShot s;
    const double v = std::sqrt(2.0) + 0.01;
    const int n = 200;
    const double h = 0.05;
    for (int i = 1; i <= n; ++i) {
        const double r = i * h;
        s.r.push_back(r);
        s.rho.push_back(r);
        s.rho_p.push_back(1.0);
        s.v.push_back(v);
        s.v_p.push_back(0.0);
        s.f_p.push_back(r / 2.0);
        s.f.push_back(r * r / 4.0);
    }
    const SolitonResiduals res = identity_residuals(s);
    const double expect = std::abs(1.0 / (v * v) - 0.5);
    CHECK(res.a2_lambda2 == doctest::Approx(expect).epsilon(1e-6));
    CHECK(res.a2_lambda2 == doctest::Approx(7.0e-3).epsilon(2e-2));
}

TEST_CASE("Id1/Id2 track the soliton-equation residual") {
    const SolitonShot s = shoot(std::sqrt(2.0), 20.0);
    const double bt_floor = std::max(s.residuals.soliton_eq, 1e-14);
    CHECK(s.residuals.contract_v <= 10.0 * bt_floor);
    CHECK(s.residuals.contract_f <= 10.0 * bt_floor);
}

TEST_CASE("axis regularity: rho/r -> 1 and v'(r)/r bounded") {
    for (double v0 : {0.9, std::sqrt(2.0), 1.9}) {
        const SolitonShot s = shoot(v0, 5.0);
        REQUIRE(s.r.size() > 4);
        CHECK(s.rho[0] / s.r[0] == doctest::Approx(1.0).epsilon(1e-6));
        const double v2 = (2.0 - v0 * v0) / (4.0 * v0);
        CHECK(s.v_p[0] / s.r[0] == doctest::Approx(v2).epsilon(1e-4));
    }
}

TEST_CASE("normalization holds with one fitted constant on the cylinder branch") {
    const SolitonShot s = shoot(std::sqrt(2.0), 20.0);
    CHECK(s.normalization_residual <= 1e-8);
    // R = 1 on the bubble sheet and f(0) = 0 here, so c = 1
    CHECK(s.c_fit == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("classify_sweep: rigidity across v0 in {0.6, 0.8, ..., 3.0}") {
    std::vector<double> v0s;
    for (double v0 = 0.6; v0 <= 3.01; v0 += 0.2) v0s.push_back(v0);
    const auto sweep = classify_sweep(v0s, 50.0);
    REQUIRE(sweep.size() == v0s.size());
    for (const auto& e : sweep) {
        INFO("v0 = ", e.v0);
        if (std::abs(e.v0 - std::sqrt(2.0)) > 1e-6) {
            CHECK(e.cls != SolitonClass::Cylinder);
            CHECK(e.r_end < 50.0);
        }
    }
}

TEST_CASE("classify_sweep: {sqrt 2} alone classifies Cylinder") {
    const auto sweep = classify_sweep({std::sqrt(2.0)}, 20.0);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].cls == SolitonClass::Cylinder);
}

TEST_CASE("empty sweep is a precondition error") {
    CHECK_THROWS_AS(classify_sweep({}, 20.0), InvalidConfig);
}
