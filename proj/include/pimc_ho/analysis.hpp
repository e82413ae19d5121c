#pragma once

#include <cmath>
#include <vector>

#include "pimc_ho/energies.hpp"
#include "pimc_ho/errors.hpp"
#include "pimc_ho/propagator.hpp"
#include "pimc_ho/series.hpp"

namespace pimc_ho {

// ---------------------------------------------------------------------------
// Error coefficients
// ---------------------------------------------------------------------------

// Scaled deviations of the contracted propagator from the exact one:
// delta_{2k} is the zeta_1 coefficient at eps^{2k} times (2k)!, and
// delta'_{2k+1} the kappa_1 coefficient at eps^{2k+1} times (2k+1)!.
// A coefficient equal to 1 is exact.
struct ErrorProfile {
    int n;                         // zeta_1 correct through eps^{2n}
    double delta_defect;           // delta_{2n+2}, first defective zeta coefficient
    double delta_prime;            // delta'_{2n+1}
    double c_coeff;                // C = (1 - delta_{2n+2}) / (2n+2)!
    double d_coeff;                // D = (1 - delta'_{2n+1})/(2n+1)! - C
    int thermo_order;              // 2n
    double thermo_prefactor;       // (2n+1) C
    bool kappa_clean;              // kappa_1 correct through eps^{2n-1}
    int hamiltonian_order;         // 4n when kappa is clean, else degraded
    double hamiltonian_prefactor;  // leading coefficient of rho_H - 1
};

namespace detail {

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// gamma(eps) as a power series with unit constant term. zeta^2 - 1 and kappa
// both vanish at eps = 0, so one power of eps is factored from each before
// dividing.
template <class T>
Series<T> gamma_series(const Series<T>& zeta, const Series<T>& kappa) {
    Series<T> zm1 = zeta;
    zm1.at(0) = T(0);
    Series<T> t = T(2.0) * zm1 + zm1 * zm1; // zeta^2 - 1
    Series<T> h = t.shifted_down(2);
    Series<T> k = kappa.shifted_down(1);
    return series_div(series_sqrt(h), k);
}

template <class T>
Series<T> rho_h_series(const Series<T>& gamma) {
    Series<T> one = Series<T>::constant(T(1), gamma.order());
    return T(0.5) * (gamma + series_div(one, gamma));
}

} // namespace detail

template <class T>
ErrorProfile extract_error_profile_from(const Series<T>& zeta, const Series<T>& kappa) {
    const double match_tol = 1e-9;  // contraction noise after factorial scaling
    const int order = std::min(zeta.order(), kappa.order());

    auto delta = [&](const Series<T>& s, int k) {
        return static_cast<double>(s[k]) * detail::factorial(k);
    };

    // largest n with all scaled zeta coefficients equal to 1 through eps^{2n}
    int n = 0;
    while (2 * (n + 1) <= order && std::abs(delta(zeta, 2 * (n + 1)) - 1.0) <= match_tol) ++n;
    if (n == 0)
        throw ParameterOutOfRange(
            "error profile requires a first-order-consistent propagator (zeta coefficient at eps^2 must be 1/2)");
    if (2 * n + 2 > order)
        throw TruncationTooShallow("error profile: no defective zeta coefficient below the truncation order");

    ErrorProfile p;
    p.n = n;
    p.delta_defect = delta(zeta, 2 * n + 2);
    p.delta_prime = 2 * n + 1 <= order ? delta(kappa, 2 * n + 1) : 0.0;
    p.c_coeff = (1.0 - p.delta_defect) / detail::factorial(2 * n + 2);
    p.d_coeff = (1.0 - p.delta_prime) / detail::factorial(2 * n + 1) - p.c_coeff;
    p.thermo_order = 2 * n;
    p.thermo_prefactor = (2 * n + 1) * p.c_coeff;

    p.kappa_clean = true;
    for (int k = 0; k < n; ++k)
        if (std::abs(delta(kappa, 2 * k + 1) - 1.0) > match_tol) p.kappa_clean = false;

    // The Hamiltonian order is read off the rho_H series directly; when
    // kappa_1 is accurate through eps^{2n-1} this reproduces 4n with
    // prefactor D^2/2, and otherwise it gives the degraded order.
    Series<T> rho = detail::rho_h_series(detail::gamma_series(zeta, kappa));
    const double lead_tol = 1e-12;
    p.hamiltonian_order = 0;
    p.hamiltonian_prefactor = 0.0;
    for (int k = 1; k <= rho.order(); ++k) {
        double c = static_cast<double>(rho[k]);
        if (std::abs(c) > lead_tol) {
            p.hamiltonian_order = k;
            p.hamiltonian_prefactor = c;
            break;
        }
    }
    if (p.hamiltonian_order == 0)
        throw TruncationTooShallow("error profile: rho_H defect below the truncation order");
    return p;
}

inline ErrorProfile extract_error_profile(const ContractedPropagator& prop,
                                          int order = default_truncation_order) {
    return extract_error_profile_from(prop.zeta_series(order), prop.kappa_series(order));
}

// Same profile computed with the compensated (double-double) backend.
inline ErrorProfile extract_error_profile_extended(const ContractedPropagator& prop,
                                                   int order = default_truncation_order) {
    SeriesContraction<DoubleDouble> s = prop.contract_in<DoubleDouble>(order);
    return extract_error_profile_from(s.zeta, s.kappa);
}

// Leading asymptotic factors E^T/E -> 1 - (2n+1) C eps^{2n} and
// E^H/E -> 1 + (D^2/2) eps^{4n} (or the degraded equivalent).
struct PredictedPrefactors {
    double thermo, hamiltonian;
};

inline PredictedPrefactors predicted_prefactors(const ErrorProfile& p, double eps) {
    return {1.0 - p.thermo_prefactor * std::pow(eps, p.thermo_order),
            1.0 + p.hamiltonian_prefactor * std::pow(eps, p.hamiltonian_order)};
}

// u(eps)/eps as a series: du/deps = (dzeta/deps) / sqrt(zeta^2 - 1) is an
// even series with unit constant term, integrated term by term. The
// coefficient at eps^{2n} is -C.
inline Series<double> portal_over_eps_series(const ContractedPropagator& prop,
                                             int order = default_truncation_order) {
    Series<double> zeta = prop.zeta_series(order);
    zeta.at(0) = 0.0;
    Series<double> t = 2.0 * zeta + zeta * zeta;
    Series<double> h = t.shifted_down(2);
    // dzeta/deps starts at eps^1 with coefficient 1; divide one power out
    Series<double> ghat = zeta.derivative().shifted_down(1).truncated(h.order());
    Series<double> du = series_div(ghat, series_sqrt(h));
    Series<double> u_over_eps = Series<double>::constant(0.0, du.order());
    for (int k = 0; k <= du.order(); ++k) u_over_eps.at(k) = du[k] / (k + 1);
    return u_over_eps;
}

// ---------------------------------------------------------------------------
// Empirical convergence order
// ---------------------------------------------------------------------------

enum class Estimator { thermo, hamiltonian };

struct OrderFit {
    int nominal_order;   // from the error profile
    double slope;        // fitted log-log slope
    double eps_lo;       // window actually used
    double eps_hi;
    int points;
    double rms_residual; // RMS deviation from the fitted line, log10 units
};

struct FitOptions {
    double eps_max = 3.0;
    double eps_min = 1e-6;
    int points_per_decade = 12;
    double error_floor = 1e-12; // below: double-precision cancellation
    double error_cap = 1e-3;    // above: higher-order terms bend the line
    double rms_tol = 0.010;     // log10 linearity threshold for the window
    int min_points = 5;
    bool extended = false;          // compensated backend for the sweep
    double extended_floor = 1e-20;  // replaces error_floor when extended
};

namespace detail {

struct LinFit {
    double slope, intercept, rms;
};

inline LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t lo, std::size_t hi) {
    double n = double(hi - lo), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        double r = y[i] - (slope * x[i] + intercept);
        ss += r * r;
    }
    return {slope, intercept, std::sqrt(ss / n)};
}

// Estimator defect |rho - 1| at a scalar eps, in double precision.
inline double prefactor_defect(const ContractedPropagator& prop, Estimator est, double eps) {
    double w = prop.zeta_minus_one(eps);
    if (w < 0.0) throw SubunityZeta("prefactor_defect: zeta_1 < 1");
    double kappa = prop.kappa1(eps);
    if (kappa <= 0.0) throw ContractionSingularity("prefactor_defect: kappa_1 <= 0");
    double s = std::sqrt(w * (2.0 + w));
    if (est == Estimator::thermo) return std::abs(prop.dzeta1(eps) - s) / s;
    // (gamma + 1/gamma)/2 - 1 = (gamma-1)^2 / (2 gamma), cancellation-free
    double gamma = s / kappa;
    double gm1 = (s - kappa) / kappa;
    return std::abs(gm1 * gm1 / (2.0 * gamma));
}

// Same defect evaluated with double-double polynomial coefficients; pushes
// the cancellation floor far below 1e-12.
struct ExtendedPolys {
    std::vector<DoubleDouble> zm1, kappa, dzeta;

    static ExtendedPolys from(const ContractedPropagator& prop) {
        if (!prop.sequence())
            throw ParameterOutOfRange("extended sweep needs a step-sequence propagator");
        int degree = sequence_degree(*prop.sequence());
        SeriesContraction<DoubleDouble> s = prop.contract_in<DoubleDouble>(degree);
        ExtendedPolys p;
        p.zm1 = s.zeta.coeffs();
        p.zm1[0] = DoubleDouble(0.0);
        p.kappa = s.kappa.coeffs();
        p.dzeta.assign(p.zm1.size() > 1 ? p.zm1.size() - 1 : 1, DoubleDouble(0.0));
        for (std::size_t k = 1; k < p.zm1.size(); ++k)
            p.dzeta[k - 1] = DoubleDouble(double(k)) * p.zm1[k];
        return p;
    }

    static DoubleDouble eval(const std::vector<DoubleDouble>& c, DoubleDouble x) {
        DoubleDouble acc(0.0);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }

    double defect(Estimator est, double eps_d) const {
        DoubleDouble eps(eps_d);
        DoubleDouble w = eval(zm1, eps);
        DoubleDouble k = eval(kappa, eps);
        DoubleDouble s = sqrt(w * (DoubleDouble(2.0) + w));
        if (est == Estimator::thermo)
            return std::abs(double((eval(dzeta, eps) - s) / s));
        DoubleDouble gm1 = (s - k) / k;
        DoubleDouble gamma = s / k;
        return std::abs(double(gm1 * gm1 / (DoubleDouble(2.0) * gamma)));
    }
};

} // namespace detail

// Fits the log-log slope of the estimator's defect at fixed tau: the sweep
// measures |E_est(eps) - E_N(eps)| / E(tau), i.e. the estimator against the
// universal discrete energy at the same portal parameter. Comparing against
// E(tau) directly would floor every Hamiltonian sweep at the universal
// energy's own eps^{2n} drift (coefficient ~ e^{-tau}), which at tau = 10 is
// the same magnitude as a twelfth-order prefactor; the universal baseline
// removes that propagator-independent part and leaves the quantity the
// convergence formulas constrain. Only defects inside [floor, cap] enter;
// the window is the longest contiguous stretch that stays on one line.
inline OrderFit fit_order(const ContractedPropagator& prop, Estimator estimator, double tau,
                          const FitOptions& opt = {}) {
    const double e_ref = exact_energy(tau);
    ErrorProfile profile = opt.extended ? extract_error_profile_extended(prop)
                                        : extract_error_profile(prop);
    const int nominal =
        estimator == Estimator::thermo ? profile.thermo_order : profile.hamiltonian_order;

    detail::ExtendedPolys ext;
    if (opt.extended) ext = detail::ExtendedPolys::from(prop);
    const double err_floor = opt.extended ? opt.extended_floor : opt.error_floor;

    // descending geometric grid of eps
    std::vector<double> log_eps, log_err;
    const double ratio = std::pow(10.0, 1.0 / opt.points_per_decade);
    for (double eps = opt.eps_max; eps >= opt.eps_min; eps /= ratio) {
        double rel;
        try {
            double defect = opt.extended ? ext.defect(estimator, eps)
                                         : detail::prefactor_defect(prop, estimator, eps);
            PortalQuantities q = portal(prop, eps);
            double e_universal = 0.5 * detail::coth(0.5 * (tau / eps) * q.u);
            rel = defect * e_universal / e_ref;
        } catch (const NumericalError&) {
            continue; // outside the propagator's usable range
        }
        if (rel < err_floor || rel > opt.error_cap || !std::isfinite(rel)) continue;
        log_eps.push_back(std::log10(eps));
        log_err.push_back(std::log10(rel));
    }

    const std::size_t n = log_eps.size();
    const std::size_t min_pts = static_cast<std::size_t>(opt.min_points);
    if (n < min_pts) throw WindowEmpty("fit_order: no usable eps window inside the error band");

    // longest contiguous window with rms <= tol; ties go to larger eps
    bool found = false;
    std::size_t best_lo = 0, best_hi = min_pts;
    detail::LinFit best{};
    for (std::size_t lo = 0; lo + min_pts <= n; ++lo) {
        for (std::size_t hi = n; hi >= lo + min_pts; --hi) {
            if (found && hi - lo < best_hi - best_lo) break;
            detail::LinFit trial = detail::least_squares(log_eps, log_err, lo, hi);
            if (trial.rms <= opt.rms_tol) {
                if (!found || hi - lo > best_hi - best_lo) {
                    found = true;
                    best_lo = lo;
                    best_hi = hi;
                    best = trial;
                }
                break; // longer windows at this lo already rejected or taken
            }
        }
    }
    if (!found) {
        // nothing linear enough: report the least-bent minimal window
        best_lo = 0;
        best_hi = min_pts;
        best = detail::least_squares(log_eps, log_err, 0, min_pts);
        for (std::size_t lo = 1; lo + min_pts <= n; ++lo) {
            detail::LinFit trial = detail::least_squares(log_eps, log_err, lo, lo + min_pts);
            if (trial.rms < best.rms) {
                best = trial;
                best_lo = lo;
                best_hi = lo + min_pts;
            }
        }
    }

    OrderFit fit;
    fit.nominal_order = nominal;
    fit.slope = best.slope;
    fit.eps_hi = std::pow(10.0, log_eps[best_lo]);
    fit.eps_lo = std::pow(10.0, log_eps[best_hi - 1]);
    fit.points = static_cast<int>(best_hi - best_lo);
    fit.rms_residual = best.rms;
    return fit;
}

} // namespace pimc_ho
