#include <doctest.h>

#include <cmath>
#include <limits>

#include "gravtop/error.hpp"
#include "gravtop/mma.hpp"

using namespace gravtop;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("one variable, active linear constraint") {
    MmaSettings s;
    s.move = 0.2;
    MmaState mma(1, 1, s, vec({0.0}), vec({1.0}));
    Eigen::VectorXd x = vec({0.1});
    int it = 0;
    for (; it < 50; ++it) {
        const double f0 = (x[0] - 1) * (x[0] - 1);
        Eigen::MatrixXd dg(1, 1);
        dg(0, 0) = 1.0;
        const Eigen::VectorXd xn = mma.update(x, f0, vec({2 * (x[0] - 1)}), vec({x[0] - 0.5}), dg);
        CHECK(std::abs(xn[0] - x[0]) <= s.move + 1e-15);
        x = xn;
    }
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(mma.multipliers()[0] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("first step of an unconstrained quadratic is the move limit") {
    const int n = 5;
    MmaSettings s;
    s.move = 0.1;
    MmaState mma(n, 1, s, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n));
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.9);
    // A slack dummy constraint that never binds.
    const Eigen::MatrixXd dg = Eigen::MatrixXd::Zero(1, n);
    const Eigen::VectorXd df = 2.0 * (x.array() - 0.3).matrix();
    const Eigen::VectorXd xn = mma.update(x, (x.array() - 0.3).square().sum(), df, vec({-1.0}), dg);
    for (int i = 0; i < n; ++i) CHECK(xn[i] == 0.8);
}

TEST_CASE("two variables with a reciprocal constraint") {
    MmaSettings s;
    s.move = 1.0;
    MmaState mma(2, 1, s, Eigen::VectorXd::Constant(2, 0.1), Eigen::VectorXd::Ones(2));
    Eigen::VectorXd x = vec({0.9, 0.7});
    for (int it = 0; it < 100; ++it) {
        const double g = 1 / x[0] + 1 / x[1] - 4;
        Eigen::MatrixXd dg(1, 2);
        dg << -1 / (x[0] * x[0]), -1 / (x[1] * x[1]);
        x = mma.update(x, x.sum(), Eigen::VectorXd::Ones(2), vec({g}), dg);
    }
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("separable quadratic with a budget matches the KKT solution") {
    // min sum w_i (x_i - 1)^2 s.t. sum x_i <= 1.5: x_i = 1 - mu / (2 w_i).
    const Eigen::VectorXd w = vec({1.0, 2.0, 4.0});
    const double mu = 1.5 / (0.5 / 1.0 + 0.5 / 2.0 + 0.5 / 4.0) * 1.0;
    Eigen::VectorXd expect(3);
    for (int i = 0; i < 3; ++i) expect[i] = 1 - mu / (2 * w[i]);
    REQUIRE(expect.sum() == doctest::Approx(1.5));

    MmaSettings s;
    s.move = 0.2;
    MmaState mma(3, 1, s, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.5);
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd df = 2.0 * w.cwiseProduct(x - Eigen::VectorXd::Ones(3));
        const double f0 = w.dot((x.array() - 1).square().matrix());
        x = mma.update(x, f0, df, vec({(x.sum() - 1.5) / 1.5}), Eigen::MatrixXd::Constant(1, 3, 1.0 / 1.5));
    }
    CHECK((x - expect).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("iterates respect bounds, move limits and asymptotes") {
    const int n = 30;
    MmaSettings s;
    s.move = 0.05;
    MmaState mma(n, 2, s, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n));
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    for (int it = 0; it < 40; ++it) {
        Eigen::VectorXd df(n);
        for (int i = 0; i < n; ++i) df[i] = std::sin(3.0 * i + it) - 0.2;
        Eigen::MatrixXd dg(2, n);
        dg.row(0).setConstant(1.0 / n);
        for (int i = 0; i < n; ++i) dg(1, i) = -std::cos(0.3 * i);
        const Eigen::VectorXd g = vec({x.mean() - 0.4, -(dg.row(1) * x)(0) - 3.0});
        const Eigen::VectorXd xn = mma.update(x, df.dot(x), df, g, dg);
        for (int i = 0; i < n; ++i) {
            CHECK(xn[i] >= std::max(0.0, x[i] - s.move));
            CHECK(xn[i] <= std::min(1.0, x[i] + s.move));
            CHECK(mma.lower_asymptote()[i] < x[i]);
            CHECK(x[i] < mma.upper_asymptote()[i]);
            CHECK(mma.alpha()[i] <= xn[i]);
            CHECK(xn[i] <= mma.beta()[i]);
        }
        x = xn;
    }
    CHECK(mma.iteration() == 40);
}

TEST_CASE("conflicting constraints are absorbed by the elastic variables") {
    MmaState mma(2, 2, MmaSettings{}, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
    const Eigen::VectorXd x = vec({0.5, 0.5});
    Eigen::MatrixXd dg(2, 2);
    dg << 1, 1, -1, -1;
    // x1 + x2 <= 0.2 and x1 + x2 >= 1.8 cannot both hold.
    const Eigen::VectorXd g = vec({x.sum() - 0.2, 1.8 - x.sum()});
    const Eigen::VectorXd xn = mma.update(x, 0.0, vec({0.01, 0.01}), g, dg);
    CHECK(std::isfinite(xn[0]));
    CHECK(xn.minCoeff() >= 0.0);
    CHECK(xn.maxCoeff() <= 1.0);
    CHECK(mma.elastic().maxCoeff() > 0.0);
}

TEST_CASE("non-finite input is an optimizer error") {
    MmaState mma(2, 1, MmaSettings{}, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
    const Eigen::VectorXd x = vec({0.5, 0.5});
    const Eigen::MatrixXd dg = Eigen::MatrixXd::Ones(1, 2);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(mma.update(x, 1.0, vec({nan, 0.0}), vec({0.0}), dg), OptimizerError);
    CHECK_THROWS_AS(mma.update(x, 1.0, vec({0.0, 0.0}), vec({nan}), dg), OptimizerError);
    CHECK_THROWS_AS(mma.update(x, nan, vec({0.0, 0.0}), vec({0.0}), dg), OptimizerError);
}
