#include "gravtop/mma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

// Separable convex approximation; the dual is maximized over lambda >= 0.
struct Subproblem {
    const Eigen::VectorXd& low;
    const Eigen::VectorXd& upp;
    const Eigen::VectorXd& alpha;
    const Eigen::VectorXd& beta;
    Eigen::VectorXd p0, q0;
    Eigen::MatrixXd p, q; // m x n
    Eigen::VectorXd b;
    double c;
    double d;

    Eigen::Index n() const { return low.size(); }
    Eigen::Index m() const { return b.size(); }

    double lambda_cap() const { return d > 0.0 ? std::numeric_limits<double>::infinity() : c; }

    void primal(const Eigen::VectorXd& lambda, Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        x.resize(n());
        for (Eigen::Index j = 0; j < n(); ++j) {
            const double pj = p0[j] + (m() > 0 ? p.col(j).dot(lambda) : 0.0);
            const double qj = q0[j] + (m() > 0 ? q.col(j).dot(lambda) : 0.0);
            const double sp = std::sqrt(pj);
            const double sq = std::sqrt(qj);
            const double xj = (low[j] * sp + upp[j] * sq) / (sp + sq);
            x[j] = std::clamp(xj, alpha[j], beta[j]);
        }
        y.resize(m());
        for (Eigen::Index i = 0; i < m(); ++i) y[i] = d > 0.0 ? std::max(0.0, (lambda[i] - c) / d) : 0.0;
    }

    double dual_value(const Eigen::VectorXd& lambda, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        double w = 0.0;
        for (Eigen::Index j = 0; j < n(); ++j) {
            const double pj = p0[j] + (m() > 0 ? p.col(j).dot(lambda) : 0.0);
            const double qj = q0[j] + (m() > 0 ? q.col(j).dot(lambda) : 0.0);
            w += pj / (upp[j] - x[j]) + qj / (x[j] - low[j]);
        }
        for (Eigen::Index i = 0; i < m(); ++i) {
            w += -lambda[i] * b[i] + c * y[i] + 0.5 * d * y[i] * y[i] - lambda[i] * y[i];
        }
        return w;
    }

    Eigen::VectorXd dual_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        Eigen::VectorXd ux = (upp - x).cwiseInverse();
        Eigen::VectorXd xl = (x - low).cwiseInverse();
        return p * ux + q * xl - b - y;
    }

    Eigen::MatrixXd dual_hessian(const Eigen::VectorXd& lambda, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m(), m());
        Eigen::VectorXd gj(m());
        for (Eigen::Index j = 0; j < n(); ++j) {
            if (x[j] <= alpha[j] || x[j] >= beta[j]) continue;
            const double ux = upp[j] - x[j];
            const double xl = x[j] - low[j];
            const double pj = p0[j] + p.col(j).dot(lambda);
            const double qj = q0[j] + q.col(j).dot(lambda);
            const double curvature = 2.0 * pj / (ux * ux * ux) + 2.0 * qj / (xl * xl * xl);
            gj = p.col(j) / (ux * ux) - q.col(j) / (xl * xl);
            h.noalias() -= gj * gj.transpose() / curvature;
        }
        for (Eigen::Index i = 0; i < m(); ++i) {
            if (y[i] > 0.0) h(i, i) -= 1.0 / d;
        }
        return h;
    }
};

Eigen::VectorXd project_dual(const Eigen::VectorXd& lambda, double cap) {
    return lambda.cwiseMax(0.0).cwiseMin(cap);
}

double projected_gradient_norm(const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad, double cap) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        double g = grad[i];
        if (lambda[i] <= 0.0) g = std::max(g, 0.0);
        if (lambda[i] >= cap) g = std::min(g, 0.0);
        norm = std::max(norm, std::abs(g));
    }
    return norm;
}

// Projected Newton ascent with Armijo backtracking on the concave dual.
Eigen::VectorXd solve_dual(const Subproblem& sp, Eigen::VectorXd lambda, const MmaSettings& settings,
                           Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const double cap = sp.lambda_cap();
    lambda = project_dual(lambda, cap);
    sp.primal(lambda, x, y);
    if (sp.m() == 0) return lambda;

    double w = sp.dual_value(lambda, x, y);
    Eigen::VectorXd xt, yt;
    for (int it = 0; it < settings.dual_max_iter; ++it) {
        const Eigen::VectorXd grad = sp.dual_gradient(x, y);
        if (projected_gradient_norm(lambda, grad, cap) <= settings.dual_tolerance) break;

        // Free set: multipliers not held at a bound by the gradient.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < sp.m(); ++i) {
            const bool at_zero = lambda[i] <= 0.0 && grad[i] <= 0.0;
            const bool at_cap = lambda[i] >= cap && grad[i] >= 0.0;
            if (!at_zero && !at_cap) free.push_back(i);
        }
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(sp.m());
        if (!free.empty()) {
            const Eigen::MatrixXd h = sp.dual_hessian(lambda, x, y);
            const auto nf = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd hf(nf, nf);
            Eigen::VectorXd gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = grad[free[a]];
                for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = -h(free[a], free[b]);
            }
            const double shift = 1e-12 * std::max(1.0, hf.diagonal().cwiseAbs().maxCoeff());
            hf.diagonal().array() += shift;
            const Eigen::VectorXd step = hf.ldlt().solve(gf);
            for (Eigen::Index a = 0; a < nf; ++a) dir[free[a]] = step[a];
            if (!dir.allFinite() || dir.dot(grad) <= 0.0) {
                dir.setZero();
                for (Eigen::Index a = 0; a < nf; ++a) dir[free[a]] = gf[a];
            }
        }

        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Eigen::VectorXd trial = project_dual(lambda + t * dir, cap);
            sp.primal(trial, xt, yt);
            const double wt = sp.dual_value(trial, xt, yt);
            if (wt >= w + 1e-4 * grad.dot(trial - lambda)) {
                const bool moved = (trial - lambda).cwiseAbs().maxCoeff() > 0.0;
                lambda = trial;
                x.swap(xt);
                y.swap(yt);
                w = wt;
                accepted = moved;
                break;
            }
        }
        if (!accepted) break;
    }
    return lambda;
}

} // namespace

MmaState::MmaState(Eigen::Index n, Eigen::Index m, MmaSettings settings, Eigen::VectorXd lower,
                   Eigen::VectorXd upper)
    : n_(n), m_(m), settings_(settings), xmin_(std::move(lower)), xmax_(std::move(upper)),
      lambda_(Eigen::VectorXd::Zero(m)), y_(Eigen::VectorXd::Zero(m)) {
    if (xmin_.size() != n || xmax_.size() != n) throw OptimizerError("MMA bounds have the wrong length");
    if (((xmax_ - xmin_).array() <= 0.0).any()) throw OptimizerError("MMA bounds must satisfy lower < upper");
    if (!(settings_.move > 0.0)) throw OptimizerError("MMA move limit must be > 0");
    if (!(settings_.d >= 0.0 && settings_.c > 0.0)) throw OptimizerError("MMA penalties must satisfy c > 0, d >= 0");
}

Eigen::VectorXd MmaState::update(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0,
                                 const Eigen::VectorXd& g, const Eigen::MatrixXd& dg) {
    if (x.size() != n_ || df0.size() != n_ || g.size() != m_ || dg.rows() != m_ || dg.cols() != n_) {
        throw OptimizerError("MMA input dimensions do not match the state");
    }
    if (!std::isfinite(f0) || !df0.allFinite() || !g.allFinite() || !dg.allFinite()) {
        throw OptimizerError("non-finite objective or constraint information passed to MMA");
    }
    if (!x.allFinite()) throw OptimizerError("non-finite design passed to MMA");

    ++iteration_;
    const Eigen::VectorXd range = xmax_ - xmin_;
    if (iteration_ <= 2) {
        low_ = x - settings_.asyinit * range;
        upp_ = x + settings_.asyinit * range;
    } else {
        for (Eigen::Index j = 0; j < n_; ++j) {
            const double trend = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
            const double factor = trend < 0.0 ? settings_.asydecr : (trend > 0.0 ? settings_.asyincr : 1.0);
            double l = x[j] - factor * (xold1_[j] - low_[j]);
            double u = x[j] + factor * (upp_[j] - xold1_[j]);
            l = std::clamp(l, x[j] - 10.0 * range[j], x[j] - 0.01 * range[j]);
            u = std::clamp(u, x[j] + 0.01 * range[j], x[j] + 10.0 * range[j]);
            low_[j] = l;
            upp_[j] = u;
        }
    }

    alpha_.resize(n_);
    beta_.resize(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
        alpha_[j] = std::max({xmin_[j], low_[j] + settings_.albefa * (x[j] - low_[j]), x[j] - settings_.move});
        beta_[j] = std::min({xmax_[j], upp_[j] - settings_.albefa * (upp_[j] - x[j]), x[j] + settings_.move});
        if (alpha_[j] > beta_[j]) alpha_[j] = beta_[j] = std::clamp(x[j], xmin_[j], xmax_[j]);
    }

    Subproblem sp{low_, upp_, alpha_, beta_, {}, {}, {}, {}, {}, settings_.c, settings_.d};
    const Eigen::VectorXd ux2 = (upp_ - x).array().square();
    const Eigen::VectorXd xl2 = (x - low_).array().square();
    const Eigen::VectorXd reg = settings_.raa0 * range.cwiseMax(1e-5).cwiseInverse();
    auto coefficients = [&](const Eigen::VectorXd& grad, Eigen::Ref<Eigen::VectorXd> p, Eigen::Ref<Eigen::VectorXd> q) {
        const Eigen::ArrayXd pos = grad.array().max(0.0);
        const Eigen::ArrayXd neg = (-grad.array()).max(0.0);
        p = (ux2.array() * (1.001 * pos + 0.001 * neg + reg.array())).matrix();
        q = (xl2.array() * (0.001 * pos + 1.001 * neg + reg.array())).matrix();
    };
    sp.p0.resize(n_);
    sp.q0.resize(n_);
    coefficients(df0, sp.p0, sp.q0);
    sp.p.resize(m_, n_);
    sp.q.resize(m_, n_);
    sp.b.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
        Eigen::VectorXd pi(n_), qi(n_);
        coefficients(dg.row(i).transpose(), pi, qi);
        sp.p.row(i) = pi.transpose();
        sp.q.row(i) = qi.transpose();
        sp.b[i] = (pi.array() / (upp_ - x).array() + qi.array() / (x - low_).array()).sum() - g[i];
    }

    Eigen::VectorXd xnew, ynew;
    lambda_ = solve_dual(sp, lambda_, settings_, xnew, ynew);
    y_ = ynew;
    if (!xnew.allFinite()) throw OptimizerError("MMA subproblem produced a non-finite iterate");

    xold2_ = iteration_ >= 2 ? xold1_ : x;
    xold1_ = x;
    return xnew;
}

} // namespace gravtop
