#pragma once

#include <cmath>
#include <string>

#include "pimc_ho/errors.hpp"
#include "pimc_ho/propagator.hpp"

namespace pimc_ho {

// Everything a short-time propagator feeds into the N-bead formulas, all
// evaluated at one step size. u is the portal parameter arccosh(zeta_1);
// the discrete propagator depends on the splitting only through it.
struct PortalQuantities {
    double eps;
    double u;      // arccosh(zeta_1)
    double gamma;  // sqrt(zeta_1^2 - 1) / kappa_1
    double lambda; // (dzeta_1/deps) / kappa_1
    double rho_t;  // lambda / gamma, thermodynamic prefactor
    double rho_h;  // (gamma + 1/gamma) / 2, Hamiltonian prefactor
    double g;      // exp(u/2)
};

inline PortalQuantities portal(const ContractedPropagator& prop, double eps) {
    PortalQuantities q;
    q.eps = eps;
    if (prop.is_exact()) {
        q.u = eps;
        q.gamma = 1.0;
        q.lambda = 1.0;
        q.rho_t = 1.0;
        q.rho_h = 1.0;
        q.g = std::exp(0.5 * eps);
        return q;
    }
    double w = prop.zeta_minus_one(eps); // zeta_1 - 1, cancellation-free
    if (w < 0.0)
        throw SubunityZeta("portal: zeta_1 < 1 at eps=" + detail::fmt_param(eps) +
                           " for " + prop.label());
    double kappa = prop.kappa1(eps);
    if (kappa <= 0.0)
        throw ContractionSingularity("portal: kappa_1 <= 0 at eps=" + detail::fmt_param(eps));
    double s = std::sqrt(w * (2.0 + w)); // sinh(u) = sqrt(zeta_1^2 - 1)
    q.u = std::log1p(w + s);
    q.gamma = s / kappa;
    q.lambda = prop.dzeta1(eps) / kappa;
    q.rho_t = q.lambda / q.gamma;
    q.rho_h = 0.5 * (q.gamma + 1.0 / q.gamma);
    q.g = std::exp(0.5 * q.u);
    return q;
}

namespace detail {

inline double coth(double x) {
    // tanh saturates to 1 well before sinh/cosh overflow
    return 1.0 / std::tanh(x);
}

inline double inv_two_sinh(double x) {
    // 1/(2 sinh x) = exp(-x) / (1 - exp(-2x)), stable for any x > 0
    return std::exp(-x) / (-std::expm1(-2.0 * x));
}

} // namespace detail

// All energies for one (propagator, N, eps) point.
struct EnergyResult {
    int n_beads;
    double eps;
    double tau;           // N * eps
    double e_universal;   // E_N = coth(N u / 2) / 2
    double e_thermo;      // rho_T * E_N
    double e_hamiltonian; // rho_H * E_N
    double z;             // 1 / (2 sinh(N u / 2))
    bool extrapolated;    // eps beyond the family's validity range
    std::string label;
};

inline EnergyResult evaluate_eps(const ContractedPropagator& prop, int n_beads, double eps) {
    if (n_beads < 1) throw ParameterOutOfRange("evaluate_eps: N must be >= 1");
    if (!(eps > 0.0)) throw ParameterOutOfRange("evaluate_eps: eps must be > 0");
    PortalQuantities q = portal(prop, eps);
    double x = 0.5 * n_beads * q.u;
    EnergyResult r;
    r.n_beads = n_beads;
    r.eps = eps;
    r.tau = n_beads * eps;
    r.e_universal = 0.5 * detail::coth(x);
    r.e_thermo = q.rho_t * r.e_universal;
    r.e_hamiltonian = q.rho_h * r.e_universal;
    r.z = detail::inv_two_sinh(x);
    r.extrapolated = eps > prop.eps_max();
    r.label = prop.label();
    return r;
}

// tau-first entry point: eps = tau / N.
inline EnergyResult evaluate_tau(const ContractedPropagator& prop, int n_beads, double tau) {
    if (n_beads < 1) throw ParameterOutOfRange("evaluate_tau: N must be >= 1");
    return evaluate_eps(prop, n_beads, tau / n_beads);
}

inline double thermo_energy(const ContractedPropagator& prop, int n_beads, double eps) {
    return evaluate_eps(prop, n_beads, eps).e_thermo;
}

inline double hamiltonian_energy(const ContractedPropagator& prop, int n_beads, double eps) {
    return evaluate_eps(prop, n_beads, eps).e_hamiltonian;
}

inline double partition_function(const ContractedPropagator& prop, int n_beads, double eps) {
    return evaluate_eps(prop, n_beads, eps).z;
}

// N-bead universal coefficients zeta_N = cosh(Nu), kappa_N = sinh(Nu)/gamma,
// mu_N = gamma * tanh(Nu/2).
struct BeadQuantities {
    double zeta, kappa, mu;
};

inline BeadQuantities bead_quantities(const ContractedPropagator& prop, int n_beads, double eps) {
    if (n_beads < 1) throw ParameterOutOfRange("bead_quantities: N must be >= 1");
    PortalQuantities q = portal(prop, eps);
    double nu = n_beads * q.u;
    return {std::cosh(nu), std::sinh(nu) / q.gamma, q.gamma * std::tanh(0.5 * nu)};
}

// Converged limit at fixed tau: E(tau) = coth(tau/2) / 2.
inline double exact_energy(double tau) { return 0.5 * detail::coth(0.5 * tau); }

} // namespace pimc_ho
