#include <doctest.h>

#include <cmath>
#include <random>

#include "gravtop/error.hpp"
#include "gravtop/material.hpp"

using namespace gravtop;

TEST_CASE("heaviside endpoints and a direct evaluation") {
    CHECK(heaviside(0.0, 0.1, 12.0) == 0.0);
    CHECK(heaviside(1.0, 0.1, 12.0) == 1.0);
    CHECK(heaviside(1.0, 0.37, 3.0) == 1.0);
    const double direct = std::tanh(1.2) / (std::tanh(1.2) + std::tanh(10.8));
    CHECK(heaviside(0.1, 0.1, 12.0) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(heaviside(0.1, 0.1, 12.0) == doctest::Approx(0.4546).epsilon(1e-4));
}

TEST_CASE("heaviside derivative peaks at eta") {
    double best_v = 0.0, best = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double v = i / 10000.0;
        const double d = heaviside_deriv(v, 0.2, 8.0);
        if (d > best) {
            best = d;
            best_v = v;
        }
    }
    CHECK(best_v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("heaviside derivative against central differences") {
    const double h = 1e-6;
    for (double v : {0.05, 0.3, 0.9}) {
        const double fd = (heaviside(v + h, 0.1, 12.0) - heaviside(v - h, 0.1, 12.0)) / (2 * h);
        CHECK(heaviside_deriv(v, 0.1, 12.0) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("heaviside derivative integrates to one") {
    // Composite Gauss-Legendre, 3 points on 2000 panels.
    const double gp[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const int panels = 2000;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = static_cast<double>(k) / panels, b = static_cast<double>(k + 1) / panels;
        for (int q = 0; q < 3; ++q) sum += 0.5 * (b - a) * gw[q] * heaviside_deriv(0.5 * (a + b) + 0.5 * (b - a) * gp[q], 0.01, 8.0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("heaviside parameter checks") {
    CHECK_THROWS_AS(heaviside(0.5, 0.1, 0.0), ParameterError);
    CHECK_THROWS_AS(heaviside(0.5, 1.5, 8.0), ParameterError);
    CHECK_THROWS_AS(heaviside_deriv(0.5, -0.1, 8.0), ParameterError);
}

TEST_CASE("SIMP modulus") {
    const SimpModel simp;
    CHECK(simp.modulus(1.0) == 210e9);
    CHECK(simp.modulus(0.0) == 210e3);
    CHECK(simp.modulus(0.5) == doctest::Approx(210e3 + (210e9 - 210e3) * 0.125).epsilon(1e-15));
    CHECK(simp.modulus(0.5) == doctest::Approx(2.6250e10).epsilon(1e-4));
    CHECK(simp.e_void / simp.e_solid == doctest::Approx(1e-6));
    const double h = 1e-6;
    CHECK(simp.modulus_deriv(0.4) == doctest::Approx((simp.modulus(0.4 + h) - simp.modulus(0.4 - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("SIMP validation") {
    SimpModel bad;
    bad.e_void = bad.e_solid;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SimpModel p;
    p.penalty = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(SimpModel{}.modulus(1.2), ParameterError);
}

TEST_CASE("mass density values") {
    const MassDensityModel mass;
    CHECK(mass.density(1.0) == 7850.0);
    CHECK(mass.density(0.0) == doctest::Approx(7.85e-6).epsilon(1e-12));
    MassDensityModel m2;
    m2.eta_g = 0.1;
    m2.beta_g = 12.0;
    CHECK(m2.density(0.1) == doctest::Approx(3568).epsilon(1e-3));
    CHECK(m2.density(0.1) == doctest::Approx(7850.0 * (1e-9 + (1 - 1e-9) * heaviside(0.1, 0.1, 12.0))).epsilon(1e-15));
}

TEST_CASE("simplified form with eta = 0 and chi = 0") {
    MassDensityModel m;
    m.eta_g = 0.0;
    m.contrast = 0.0;
    m.beta_g = 8.0;
    for (double x : {0.0, 0.013, 0.2, 0.5, 0.77, 1.0})
        CHECK(m.density(x) == doctest::Approx(7850.0 * std::tanh(8.0 * x) / std::tanh(8.0)).epsilon(1e-14));
}

TEST_CASE("monotonicity and derivative consistency over random parameters") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> beta_d(1.0, 64.0), eta_d(0.0, 0.5), x_d(0.02, 0.98);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        MassDensityModel m;
        m.beta_g = beta_d(rng);
        m.eta_g = eta_d(rng);
        double prev = m.density(0.0);
        CHECK(prev == doctest::Approx(m.gamma_solid * m.contrast).epsilon(1e-12));
        for (int i = 1; i <= 50; ++i) {
            const double g = m.density(i / 50.0);
            CHECK(g >= prev);
            prev = g;
        }
        CHECK(m.density(1.0) == m.gamma_solid);

        const double x = x_d(rng);
        const double fd = (m.density(x + h) - m.density(x - h)) / (2 * h);
        const double an = m.density_deriv(x);
        // Far in the saturated tail the step derivative is below FD noise.
        if (std::abs(an) > 1e-3 * m.gamma_solid) CHECK(an == doctest::Approx(fd).epsilon(1e-5));

        const SimpModel simp;
        const double efd = (simp.modulus(x + h) - simp.modulus(x - h)) / (2 * h);
        CHECK(simp.modulus_deriv(x) == doctest::Approx(efd).epsilon(1e-5));
    }
}

TEST_CASE("mass density derivative omits the contrast offset") {
    MassDensityModel m;
    m.contrast = 0.2;
    const double expect = m.gamma_solid * (1.0 - m.contrast) * heaviside_deriv(0.3, m.eta_g, m.beta_g);
    CHECK(m.density_deriv(0.3) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("parameter recommendation produces warnings, not errors") {
    MassDensityModel m;
    CHECK(mass_parameter_warnings(m, 0.25, 3.0).empty());
    m.eta_g = 0.5;
    CHECK(mass_parameter_warnings(m, 0.25, 3.0).size() == 1u);
    m.beta_g = 30.0;
    CHECK(mass_parameter_warnings(m, 0.25, 3.0).size() == 2u);
    MassDensityModel bad;
    bad.contrast = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
