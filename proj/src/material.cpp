#include "gravtop/material.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

void check_step(double eta, double beta) {
    if (!(beta > 0.0)) throw ParameterError(fmt::format("Heaviside sharpness must be > 0, got {}", beta));
    if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError(fmt::format("Heaviside threshold must be in [0, 1], got {}", eta));
}

void check_unit(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw ParameterError(fmt::format("density {} outside [0, 1]", x));
}

} // namespace

double heaviside(double v, double eta, double beta) {
    check_step(eta, beta);
    if (v == 0.0) return 0.0;
    if (v == 1.0) return 1.0;
    const double a = std::tanh(beta * eta);
    return (a + std::tanh(beta * (v - eta))) / (a + std::tanh(beta * (1.0 - eta)));
}

double heaviside_deriv(double v, double eta, double beta) {
    check_step(eta, beta);
    const double t = std::tanh(beta * (v - eta));
    return beta * (1.0 - t * t) / (std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta)));
}

double SimpModel::modulus(double xbar) const {
    check_unit(xbar);
    return e_void + (e_solid - e_void) * std::pow(xbar, penalty);
}

double SimpModel::modulus_deriv(double xbar) const {
    check_unit(xbar);
    return penalty * (e_solid - e_void) * std::pow(xbar, penalty - 1.0);
}

void SimpModel::validate() const {
    if (!(e_void > 0.0 && e_void < e_solid)) {
        throw ConfigError(fmt::format("SIMP moduli must satisfy 0 < E_void < E_solid (got {}, {})", e_void, e_solid));
    }
    if (!(penalty >= 1.0)) throw ConfigError(fmt::format("SIMP penalty must be >= 1, got {}", penalty));
}

double MassDensityModel::density(double xbar) const {
    check_unit(xbar);
    return gamma_solid * (contrast + (1.0 - contrast) * heaviside(xbar, eta_g, beta_g));
}

double MassDensityModel::density_deriv(double xbar) const {
    check_unit(xbar);
    return gamma_solid * (1.0 - contrast) * heaviside_deriv(xbar, eta_g, beta_g);
}

void MassDensityModel::validate() const {
    if (!(gamma_solid > 0.0)) throw ConfigError("solid mass density must be > 0");
    if (!(contrast >= 0.0 && contrast < 1.0)) throw ConfigError("mass density contrast must be in [0, 1)");
    if (!(eta_g >= 0.0 && eta_g < 1.0)) throw ConfigError("eta_gamma must be in [0, 1)");
    if (!(beta_g > 0.0)) throw ConfigError("beta_gamma must be > 0");
}

std::vector<std::string> mass_parameter_warnings(const MassDensityModel& mass, double vf_star, double penalty) {
    std::vector<std::string> out;
    const double limit = std::pow(vf_star, penalty);
    if (mass.eta_g > limit) {
        out.push_back(fmt::format("eta_gamma = {} exceeds vf_star^p = {:.4g}; the load derivative peak sits close "
                                  "to the initial design",
                                  mass.eta_g, limit));
    }
    if (mass.beta_g < 5.0 || mass.beta_g > 20.0) {
        out.push_back(fmt::format("beta_gamma = {} is outside the recommended range [5, 20]", mass.beta_g));
    }
    return out;
}

} // namespace gravtop
