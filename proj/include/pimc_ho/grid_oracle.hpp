#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "pimc_ho/errors.hpp"
#include "pimc_ho/propagator.hpp"

namespace pimc_ho {

enum class Quadrature { trapezoid, simpson };

struct GridSpec {
    double half_width = 10.0; // harmonic lengths
    int points = 2001;
    Quadrature rule = Quadrature::simpson;
};

inline void validate(const GridSpec& g) {
    if (g.points < 64) throw ParameterOutOfRange("grid: need at least 64 points");
    if (g.half_width < 6.0) throw ParameterOutOfRange("grid: half-width must be >= 6");
    if (g.rule == Quadrature::simpson && g.points % 2 == 0)
        throw ParameterOutOfRange("grid: Simpson quadrature needs an odd point count");
}

// Discretized short-time propagator G_1(x_i, x_j; eps). The kernel factors
// as d(x') * t(x'-x) * d(x) on a uniform grid, so only O(M) exponentials are
// evaluated for the M x M matrix.
struct KernelMatrix {
    GridSpec grid;
    double eps = 0.0;
    double dx = 0.0;
    std::vector<double> x; // nodes
    std::vector<double> w; // quadrature weights
    std::vector<double> g; // row-major M x M

    double operator()(std::size_t i, std::size_t j) const {
        return g[i * x.size() + j];
    }
};

inline KernelMatrix build_kernel(const ContractedPropagator& prop, double eps,
                                 const GridSpec& grid) {
    validate(grid);
    double kappa = prop.kappa1(eps);
    double mu = prop.mu1(eps);
    if (!(kappa > 0.0) || !(mu > 0.0))
        throw NonIntegrableKernel("kernel: kappa_1 and mu_1 must be positive at eps=" +
                                  detail::fmt_param(eps) + " (" + prop.label() + ")");

    KernelMatrix k;
    k.grid = grid;
    k.eps = eps;
    const std::size_t m = static_cast<std::size_t>(grid.points);
    k.dx = 2.0 * grid.half_width / double(m - 1);
    k.x.resize(m);
    for (std::size_t i = 0; i < m; ++i) k.x[i] = -grid.half_width + double(i) * k.dx;

    k.w.assign(m, k.dx);
    if (grid.rule == Quadrature::trapezoid) {
        k.w.front() = 0.5 * k.dx;
        k.w.back() = 0.5 * k.dx;
    } else {
        for (std::size_t i = 0; i < m; ++i)
            k.w[i] = (i == 0 || i == m - 1) ? k.dx / 3.0 : (i % 2 == 1 ? 4.0 * k.dx / 3.0 : 2.0 * k.dx / 3.0);
    }

    std::vector<double> diag_factor(m), translation(m);
    for (std::size_t i = 0; i < m; ++i) diag_factor[i] = std::exp(-0.5 * mu * k.x[i] * k.x[i]);
    for (std::size_t d = 0; d < m; ++d) {
        double t = double(d) * k.dx;
        translation[d] = std::exp(-t * t / (2.0 * kappa));
    }
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * kappa);

    k.g.resize(m * m);
    // grouped so that entries (i,j) and (j,i) round identically
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i) {
        double* row = &k.g[std::size_t(i) * m];
        for (std::size_t j = 0; j < m; ++j) {
            double d2 = diag_factor[i] * diag_factor[j];
            row[j] = norm * d2 * translation[std::size_t(std::llabs(i - (long long)j))];
        }
    }
    return k;
}

namespace detail {

// C = A * diag(w) * B for row-major M x M matrices.
inline std::vector<double> compose_full(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        const std::vector<double>& w) {
    const std::size_t m = w.size();
    std::vector<double> bw(m * m);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < (long long)m; ++k) {
        const double wk = w[std::size_t(k)];
        const double* src = &b[std::size_t(k) * m];
        double* dst = &bw[std::size_t(k) * m];
        for (std::size_t j = 0; j < m; ++j) dst[j] = wk * src[j];
    }
    std::vector<double> c(m * m, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i) {
        double* crow = &c[std::size_t(i) * m];
        const double* arow = &a[std::size_t(i) * m];
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &bw[k * m];
            for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// Near-diagonal strip of A * diag(w) * B: entries (i, i+d) for |d| <= half.
// band[i][d + half] = sum_k A(i,k) w_k B(k, i+d).
inline std::vector<double> compose_band(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        const std::vector<double>& w, int half) {
    const std::size_t m = w.size();
    const std::size_t width = std::size_t(2 * half + 1);
    std::vector<double> band(m * width, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i) {
        const double* arow = &a[std::size_t(i) * m];
        for (int d = -half; d <= half; ++d) {
            long long j = i + d;
            if (j < 0 || j >= (long long)m) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) acc += arow[k] * w[k] * b[k * m + std::size_t(j)];
            band[std::size_t(i) * width + std::size_t(d + half)] = acc;
        }
    }
    return band;
}

// G_N near-diagonal band (half-width 2) from ceil(N/2)-1 full products.
inline std::vector<double> power_band(const KernelMatrix& g1, int n_beads) {
    const std::size_t m = g1.x.size();
    if (n_beads == 1) {
        std::vector<double> band(m * 5, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (int d = -2; d <= 2; ++d) {
                long long j = (long long)i + d;
                if (j >= 0 && j < (long long)m) band[i * 5 + std::size_t(d + 2)] = g1(i, std::size_t(j));
            }
        return band;
    }
    const int a = n_beads / 2, b = n_beads - a;
    std::vector<double> ga = g1.g, gb;
    for (int p = 2; p <= a; ++p) ga = compose_full(ga, g1.g, g1.w);
    if (b == a) {
        gb = ga;
    } else { // b == a + 1
        gb = (a == 1) ? compose_full(g1.g, g1.g, g1.w) : compose_full(ga, g1.g, g1.w);
    }
    return compose_band(ga, gb, g1.w, 2);
}

inline double trace_z(const KernelMatrix& g1, const std::vector<double>& band) {
    const std::size_t m = g1.x.size();
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) z += g1.w[i] * band[i * 5 + 2];
    return z;
}

} // namespace detail

struct OracleEnergies {
    double z;
    double thermo;
    double hamiltonian;
};

// Recomputes Z_N, E^T and E^H by brute force: the kernel is raised to the
// N-th power by quadrature, Z_N is the weighted trace, E^T = -d ln Z / d tau
// by central differences in eps, and E^H applies -d^2/dx^2/2 + x^2/2 to the
// first argument by a 5-point stencil on the diagonal. Nothing here touches
// the portal-parameter route the analytic module uses.
inline OracleEnergies oracle_energies(const ContractedPropagator& prop, int n_beads, double eps,
                                      const GridSpec& grid = {}) {
    if (n_beads < 1) throw ParameterOutOfRange("oracle: N must be >= 1");
    KernelMatrix g1 = build_kernel(prop, eps, grid);
    const std::size_t m = g1.x.size();
    std::vector<double> band = detail::power_band(g1, n_beads);

    OracleEnergies out;
    out.z = detail::trace_z(g1, band);

    const double h = 1e-4 * eps;
    auto log_z_at = [&](double e) {
        KernelMatrix k = build_kernel(prop, e, grid);
        return std::log(detail::trace_z(k, detail::power_band(k, n_beads)));
    };
    out.thermo = -(log_z_at(eps + h) - log_z_at(eps - h)) / (2.0 * h * n_beads);

    // interior points only; boundary values are exponentially negligible
    const double inv12dx2 = 1.0 / (12.0 * g1.dx * g1.dx);
    double numerator = 0.0;
    for (std::size_t i = 2; i + 2 < m; ++i) {
        const double* bi = &band[i * 5];
        double second = (-bi[0] + 16.0 * bi[1] - 30.0 * bi[2] + 16.0 * bi[3] - bi[4]) * inv12dx2;
        numerator += g1.w[i] * (-0.5 * second + 0.5 * g1.x[i] * g1.x[i] * bi[2]);
    }
    out.hamiltonian = numerator / out.z;
    return out;
}

// Runs the oracle at the requested grid and at doubled resolution; throws
// GridTooCoarse if the two disagree beyond tol.
inline OracleEnergies oracle_energies_checked(const ContractedPropagator& prop, int n_beads,
                                              double eps, const GridSpec& grid, double tol) {
    OracleEnergies coarse = oracle_energies(prop, n_beads, eps, grid);
    GridSpec fine = grid;
    fine.points = 2 * grid.points - 1;
    OracleEnergies refined = oracle_energies(prop, n_beads, eps, fine);
    auto differs = [&](double a, double b) { return std::abs(a - b) > tol * std::max(1.0, std::abs(b)); };
    if (differs(coarse.z, refined.z) || differs(coarse.thermo, refined.thermo) ||
        differs(coarse.hamiltonian, refined.hamiltonian))
        throw GridTooCoarse("oracle: doubling the grid shifts results by more than " +
                            detail::fmt_param(tol));
    return refined;
}

} // namespace pimc_ho
