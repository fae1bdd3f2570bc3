#include <doctest.h>

#include <cmath>
#include <string>

#include "gravtop/error.hpp"
#include "gravtop/problems.hpp"

using namespace gravtop;

TEST_CASE("every builtin validates") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        const ProblemSpec p = builtin(name);
        CHECK(p.name == name);
        CHECK_NOTHROW(validate(p));
        CHECK(p.vf_star > 0.0);
        CHECK(p.vf_star < 1.0);
        CHECK(p.filter_mult >= 1.0);
        CHECK(std::isfinite(load_scale(p)));
        CHECK(p.g2_enabled);
    }
}

TEST_CASE("unknown name lists the valid ones") {
    try {
        builtin("bridge");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const auto& name : builtin_names()) CHECK(msg.find(name) != std::string::npos);
    }
}

TEST_CASE("arch parameterizations") {
    const ProblemSpec c = builtin("arch2d_coarse");
    CHECK(c.mesh.nel[0] == 100);
    CHECK(c.mesh.nel[1] == 50);
    CHECK(c.vf_star == 0.25);
    CHECK(c.mass.eta_g == 0.01);
    CHECK(c.mass.beta_g == 8.0);
    CHECK(c.move_limit == 0.1);
    CHECK(c.filter_mult == 2.5);
    CHECK(c.kappa == 0.0);
    CHECK(c.mesh.thickness == 0.01);
    CHECK(filter_radius(c) == doctest::Approx(0.05));
    CHECK(builtin("arch2d_fine").mesh.nel[0] == 200);
    CHECK(builtin("arch2d_400").mesh.nel[0] == 400);
}

TEST_CASE("MBB load rule") {
    const ProblemSpec m = builtin("mbb_half");
    CHECK(m.mesh.nel[0] == 320);
    CHECK(m.mesh.nel[1] == 160);
    CHECK(m.filter_mult == 3.0);
    CHECK(m.load_rule == LoadRule::MaxSelfWeight);
    CHECK(load_scale(m) == doctest::Approx(2.0 * 1.0 * 0.01 * 7850.0 * 0.25 * 9.81));
    const BoundarySpec b = resolved_boundary(m);
    REQUIRE(b.loads.size() == 1u);
    CHECK(b.loads[0].magnitude == doctest::Approx(load_scale(m)));
    ProblemSpec total = m;
    total.load_rule = LoadRule::TotalSelfWeight;
    CHECK(load_scale(total) == doctest::Approx(load_scale(m) / 0.25));
}

TEST_CASE("3D tower parameterization") {
    const ProblemSpec t = builtin("tower3d");
    CHECK(t.mesh.dim == 3);
    CHECK(t.mesh.nel == std::array<int, 3>{40, 40, 200});
    CHECK(t.vf_star == 0.1);
    CHECK(t.mass.eta_g == 0.001);
    CHECK(t.mass.beta_g == 8.0);
    CHECK(filter_radius(t) == doctest::Approx(2.0 * std::sqrt(3.0) * 0.0125));
    const ProblemSpec a = builtin("arch3d");
    CHECK(a.mesh.nel == std::array<int, 3>{50, 50, 50});
    CHECK(a.vf_star == 0.35);
    CHECK(a.mass.eta_g == 0.04);
    CHECK(a.mass.beta_g == 12.0);
}

TEST_CASE("house arch void region is bottom-centred") {
    const ProblemSpec h = builtin("house_arch");
    REQUIRE(h.mesh.void_boxes.size() == 1u);
    const Box& b = h.mesh.void_boxes[0];
    CHECK(b.hi[0] - b.lo[0] == doctest::Approx(1.75));
    CHECK(b.hi[1] - b.lo[1] == doctest::Approx(1.0));
    CHECK(b.lo[1] == 0.0);
    CHECK(0.5 * (b.lo[0] + b.hi[0]) == doctest::Approx(1.0));
}

TEST_CASE("validation rejects bad values") {
    ProblemSpec p = builtin("arch2d_coarse");
    p.vf_star = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = builtin("arch2d_coarse");
    p.filter_mult = 0.5;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = builtin("arch2d_coarse");
    p.kappa = -1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = builtin("arch2d_coarse");
    p.boundary.supports.clear();
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = builtin("mbb_half");
    p.boundary.loads[0].magnitude = std::nan("");
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("mass parameter advice is a warning") {
    ProblemSpec p = builtin("arch2d_coarse");
    CHECK(warnings(p).empty());
    p.mass.eta_g = 0.2; // above 0.25^3
    CHECK(warnings(p).size() == 1u);
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("load rule names round-trip") {
    for (LoadRule r : {LoadRule::Absolute, LoadRule::MaxSelfWeight, LoadRule::TotalSelfWeight})
        CHECK(load_rule_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(load_rule_from_string("heavy"), ConfigError);
}
