#pragma once

#include <string>
#include <vector>

namespace gravtop {

/// Smooth Heaviside step
///   H(v) = [tanh(beta eta) + tanh(beta (v - eta))] / [tanh(beta eta) + tanh(beta (1 - eta))]
/// with H(0) = 0 and H(1) = 1 exactly. Throws ParameterError for beta <= 0 or
/// eta outside [0, 1].
double heaviside(double v, double eta, double beta);
double heaviside_deriv(double v, double eta, double beta);

/// Modified SIMP: E(x) = E_void + (E_solid - E_void) x^p.
struct SimpModel {
    double e_solid = 210e9;
    double e_void = 210e3;
    double penalty = 3.0;

    double modulus(double xbar) const;
    double modulus_deriv(double xbar) const;
    void validate() const;

    bool operator==(const SimpModel&) const = default;
};

/// Mass density interpolated between the void and solid phases through the
/// smooth Heaviside step with parameters {eta_g, beta_g}:
///   gamma(x) = gamma_solid (contrast + (1 - contrast) H(x, eta_g, beta_g)).
struct MassDensityModel {
    double gamma_solid = 7850.0;
    double contrast = 1e-9;
    double eta_g = 0.01;
    double beta_g = 8.0;

    double density(double xbar) const;
    double density_deriv(double xbar) const;
    void validate() const;

    bool operator==(const MassDensityModel&) const = default;
};

/// Non-fatal advice on {eta_g, beta_g}: eta_g should not exceed vf_star^p and
/// beta_g should lie in [5, 20]. Returns one message per violated rule.
std::vector<std::string> mass_parameter_warnings(const MassDensityModel& mass, double vf_star, double penalty);

} // namespace gravtop
