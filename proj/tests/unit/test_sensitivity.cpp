#include <doctest.h>

#include <cmath>
#include <random>

#include "gravtop/optimizer.hpp"
#include "gravtop/sensitivity.hpp"

using namespace gravtop;

namespace {

ProblemSpec small_arch(int nx = 6, int ny = 4) {
    ProblemSpec p = builtin("arch2d_coarse");
    p.mesh.nel = {nx, ny, 1};
    return p;
}

ProblemSpec small_mbb(double kappa) {
    ProblemSpec p = builtin("mbb_half");
    p.mesh.nel = {8, 6, 1};
    p.kappa = kappa;
    return p;
}

Eigen::VectorXd random_design(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> d(0.05, 0.95);
    Eigen::VectorXd x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

struct FdResult {
    double f0 = 0.0, g1 = 0.0, g2 = 0.0;
};

// Max relative error of the three full-chain gradients against central
// differences, each re-solving the state equation.
FdResult fd_check(Model& model, const Eigen::VectorXd& x, double beta) {
    const Evaluation ev = model.evaluate(x, beta);
    const double h = 1e-6;
    Eigen::VectorXd fd0(x.size()), fd1(x.size()), fd2(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const Evaluation a = model.evaluate(xp, beta);
        const Evaluation b = model.evaluate(xm, beta);
        fd0[i] = (a.f0 - b.f0) / (2 * h);
        fd1[i] = (a.g1 - b.g1) / (2 * h);
        fd2[i] = (a.g2 - b.g2) / (2 * h);
    }
    auto rel = [](const Eigen::VectorXd& fd, const Eigen::VectorXd& an) {
        return (fd - an).cwiseAbs().maxCoeff() / an.cwiseAbs().maxCoeff();
    };
    return {rel(fd0, ev.grad.d_f0_dx), rel(fd1, ev.grad.d_g1_dx), rel(fd2, ev.grad.d_g2_dx)};
}

} // namespace

TEST_CASE("volume constraint closed forms") {
    const int n = 40;
    const double v_star = 0.25 * n;
    const ConstraintValue at = volume_constraint(Eigen::VectorXd::Constant(n, 0.25), v_star);
    CHECK(at.value == doctest::Approx(0.0).scale(1.0));
    const ConstraintValue solid = volume_constraint(Eigen::VectorXd::Ones(n), v_star);
    CHECK(solid.value == doctest::Approx(3.0));
    CHECK(solid.grad.size() == n);
    for (double g : solid.grad) CHECK(g == doctest::Approx(1.0 / v_star).epsilon(1e-15));
}

TEST_CASE("mass constraint closed forms and gradient") {
    MeshSpec s;
    s.nel = {10, 5, 1};
    s.lengths = {2.0, 1.0, 1.0};
    s.thickness = 0.01;
    const Mesh m = build_mesh(s);
    const MassDensityModel mass;
    const double m_max = m.volume() * mass.gamma_solid * 0.25;
    const ConstraintValue solid = mass_constraint(m, mass, Eigen::VectorXd::Ones(m.num_elements()), m_max);
    CHECK(solid.value == doctest::Approx(-3.0).epsilon(1e-14));
    const ConstraintValue none = mass_constraint(m, mass, Eigen::VectorXd::Zero(m.num_elements()), m_max);
    CHECK(none.value == doctest::Approx(1.0 - mass.contrast / 0.25).epsilon(1e-14));
    CHECK(none.value > 0.0);

    std::mt19937 rng(2);
    const Eigen::VectorXd xb = random_design(m.num_elements(), rng);
    const ConstraintValue g = mass_constraint(m, mass, xb, m_max);
    const double h = 1e-6;
    for (int e = 0; e < m.num_elements(); ++e) {
        Eigen::VectorXd xp = xb, xm = xb;
        xp[e] += h;
        xm[e] -= h;
        const double fd = (mass_constraint(m, mass, xp, m_max).value - mass_constraint(m, mass, xm, m_max).value) / (2 * h);
        CHECK(std::abs(g.grad[e] - fd) <= 1e-9); // FD noise is about 1e-16 / h
    }
}

TEST_CASE("full-chain gradients on the 6x4 arch against central differences") {
    Model model(small_arch());
    std::mt19937 rng(1234);
    double worst[3] = {0, 0, 0};
    for (int trial = 0; trial < 20; ++trial) {
        const FdResult r = fd_check(model, random_design(model.mesh().num_elements(), rng), 2.0);
        worst[0] = std::max(worst[0], r.f0);
        worst[1] = std::max(worst[1], r.g1);
        worst[2] = std::max(worst[2], r.g2);
    }
    CHECK(worst[0] < 1e-5);
    CHECK(worst[1] < 1e-4);
    CHECK(worst[2] < 1e-4);
}

TEST_CASE("full-chain gradients with an external load and at sharper projection") {
    Model model(small_mbb(1.0));
    std::mt19937 rng(99);
    for (double beta : {1.0, 8.0}) {
        const FdResult r = fd_check(model, random_design(model.mesh().num_elements(), rng), beta);
        CHECK(r.f0 < 1e-4);
        CHECK(r.g2 < 1e-4);
    }
}

TEST_CASE("3D gradients against central differences") {
    ProblemSpec p = builtin("arch3d");
    p.mesh.nel = {3, 3, 3};
    Model model(p, {SolverKind::Direct});
    std::mt19937 rng(8);
    const FdResult r = fd_check(model, random_design(model.mesh().num_elements(), rng), 2.0);
    CHECK(r.f0 < 1e-4);
    CHECK(r.g2 < 1e-4);
}

TEST_CASE("sign structure") {
    ProblemSpec p = small_arch(12, 6);
    Model model(p);
    const Eigen::VectorXd xb = Eigen::VectorXd::Constant(model.mesh().num_elements(), 0.25);
    model.evaluate(xb, 1.0);
    const Eigen::VectorXd& u = model.state().displacement;
    const Eigen::VectorXd& xbar = model.chain().x_bar();

    // With loads frozen the classical compliance monotonicity returns.
    const Eigen::VectorXd frozen = objective_gradient(model.fe(), p.simp, p.mass, xbar, u, true);
    CHECK(frozen.maxCoeff() <= 0.0);
    // Self-weight only: the load term makes some entries positive.
    const Eigen::VectorXd live = objective_gradient(model.fe(), p.simp, p.mass, xbar, u, false);
    CHECK(live.maxCoeff() > 0.0);

    // A dominant external load gives the stiffness term the upper hand.
    Model loaded(small_mbb(1e4));
    loaded.evaluate(Eigen::VectorXd::Constant(loaded.mesh().num_elements(), 0.25), 1.0);
    const Eigen::VectorXd g = objective_gradient(loaded.fe(), loaded.spec().simp, loaded.spec().mass,
                                                 loaded.chain().x_bar(), loaded.state().displacement);
    CHECK(g.maxCoeff() <= 0.0);
}

TEST_CASE("adjoint identity: element term equals the global directional derivative") {
    ProblemSpec p = small_arch(5, 3);
    Model model(p);
    std::mt19937 rng(4);
    const Eigen::VectorXd x = random_design(model.mesh().num_elements(), rng);
    model.evaluate(x, 1.0);
    const Eigen::VectorXd xbar = model.chain().x_bar();
    const Eigen::VectorXd u = model.state().displacement;
    const Eigen::VectorXd ur = model.fe().reduce(u);

    const Eigen::VectorXd frozen = objective_gradient(model.fe(), p.simp, p.mass, xbar, u, true);
    auto energy = [&](const Eigen::VectorXd& xb) {
        const SparseMatrix& k = model.fe().assemble(p.simp, xb);
        return ur.dot(k.selfadjointView<Eigen::Lower>() * ur);
    };
    const double h = 1e-7;
    for (int e = 0; e < model.mesh().num_elements(); ++e) {
        Eigen::VectorXd xp = xbar, xm = xbar;
        xp[e] += h;
        xm[e] -= h;
        const double dir = (energy(xp) - energy(xm)) / (2 * h);
        CHECK(-dir == doctest::Approx(frozen[e]).epsilon(1e-6));
    }
}
