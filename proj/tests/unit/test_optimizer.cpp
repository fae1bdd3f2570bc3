#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <string>

#include "gravtop/error.hpp"
#include "gravtop/optimizer.hpp"

using namespace gravtop;

namespace {

ProblemSpec arch(int nx, int ny) {
    ProblemSpec p = builtin("arch2d_coarse");
    p.mesh.nel = {nx, ny, 1};
    return p;
}

} // namespace

TEST_CASE("initial design is the volume fraction with pinned non-design elements") {
    ProblemSpec p = builtin("house_arch");
    p.mesh.nel = {32, 32, 1};
    Model model(p);
    const Eigen::VectorXd x = model.initial_design();
    for (int e : model.mesh().design_elements()) CHECK(x[e] == p.vf_star);
    for (int e : model.mesh().nondesign_void()) CHECK(x[e] == 0.0);
    CHECK(model.v_star() == doctest::Approx(p.vf_star * 32 * 32));
    CHECK(model.m_max() == doctest::Approx(2.0 * 2.0 * 0.01 * 7850.0 * p.vf_star));
}

TEST_CASE("history bookkeeping, move limits and continuation") {
    ProblemSpec p = arch(40, 20);
    RunOptions o;
    o.n_iter = 60;
    Eigen::VectorXd prev;
    bool within = true;
    int calls = 0;
    const RunResult r = run(p, o, [&](const IterationRecord& rec, const FieldChain& chain) {
        ++calls;
        CHECK(rec.iter == calls);
        if (prev.size() > 0)
            within = within && ((chain.x() - prev).cwiseAbs().maxCoeff() <= p.move_limit + 1e-12);
        prev = chain.x();
    });
    CHECK(within);
    REQUIRE(r.history.size() == 60u);
    CHECK(calls == 60);
    for (const auto& rec : r.history) {
        CHECK(rec.vol_frac >= 0.0);
        CHECK(rec.vol_frac <= 1.0);
        CHECK(rec.beta == continuation_step(rec.iter));
        CHECK(rec.max_change <= p.move_limit + 1e-12);
        CHECK(std::isfinite(rec.f0));
    }
    CHECK(r.x_bar.size() == 800);
    CHECK(r.x.minCoeff() >= 0.0);
    CHECK(r.x.maxCoeff() <= 1.0);
}

TEST_CASE("two serial runs are bitwise identical") {
    ProblemSpec p = arch(24, 12);
    RunOptions o;
    o.n_iter = 30;
    const RunResult a = run(p, o);
    const RunResult b = run(p, o);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].f0 == b.history[i].f0);
        CHECK(a.history[i].g1 == b.history[i].g1);
        CHECK(a.history[i].g2 == b.history[i].g2);
        CHECK(a.history[i].max_change == b.history[i].max_change);
    }
    CHECK(a.x_bar == b.x_bar);
}

TEST_CASE("volume fraction steps at the continuation updates") {
    ProblemSpec p = arch(60, 30);
    RunOptions o;
    o.n_iter = 250;
    const RunResult r = run(p, o);
    std::vector<double> at_steps, elsewhere;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        const double dv = std::abs(r.history[i].vol_frac - r.history[i - 1].vol_frac);
        const int it = r.history[i].iter;
        if (it > 1 && (it - 1) % 25 == 0 && continuation_step(it) > continuation_step(it - 1))
            at_steps.push_back(dv);
        else
            elsewhere.push_back(dv);
    }
    std::nth_element(elsewhere.begin(), elsewhere.begin() + elsewhere.size() / 2, elsewhere.end());
    const double median = elsewhere[elsewhere.size() / 2];
    const double mean_steps = std::accumulate(at_steps.begin(), at_steps.end(), 0.0) / at_steps.size();
    CHECK(at_steps.size() == 8u);
    CHECK(mean_steps > median);

    const auto& last = r.history.back();
    CHECK(std::abs(last.g1) <= 0.04);
    CHECK(last.vol_frac == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("dropping g2 leaves the volume constraint inactive") {
    ProblemSpec p = arch(60, 30);
    p.g2_enabled = false;
    RunOptions o;
    o.n_iter = 150;
    const RunResult r = run(p, o);
    CHECK(r.history.back().vol_frac < 0.2);
}

TEST_CASE("analysis failures carry the iteration index") {
    ProblemSpec p = builtin("arch3d");
    p.mesh.nel = {4, 4, 4};
    RunOptions o;
    o.n_iter = 3;
    o.solver.kind = SolverKind::Cg;
    o.solver.cg_max_iter_factor = 1e-3;
    try {
        run(p, o);
        FAIL("expected an analysis error");
    } catch (const AnalysisError& e) {
        CHECK(std::string(e.what()).find("iteration 1:") == 0);
    }
}

TEST_CASE("invalid run settings") {
    RunOptions o;
    o.n_iter = 0;
    CHECK_THROWS_AS(run(arch(4, 2), o), ConfigError);
    ProblemSpec bad = arch(4, 2);
    bad.vf_star = 1.2;
    CHECK_THROWS_AS(run(bad, RunOptions{}), ConfigError);
}

TEST_CASE("early exit on small design change is off by default and works when enabled") {
    ProblemSpec p = arch(20, 10);
    RunOptions o;
    o.n_iter = 250;
    o.stop_on_change = true;
    o.change_tolerance = 0.5;
    const RunResult r = run(p, o);
    CHECK(r.history.size() == 1u);
}
