#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pimc_ho/analysis.hpp"
#include "pimc_ho/errors.hpp"
#include "pimc_ho/propagator.hpp"

namespace pimc_ho {

// ---------------------------------------------------------------------------
// Scaled error coefficients as functions of family parameters
// ---------------------------------------------------------------------------

// delta_{2k} = (2k)! * zeta coefficient, delta'_{2k+1} = (2k+1)! * kappa
// coefficient, evaluated by full series contraction at numeric parameter
// values. One code path serves every family.
struct DeltaSet {
    double d4, d5p, d6, d7p, d8;
};

inline DeltaSet eval_deltas(const StepSequence& seq) {
    SeriesContraction<double> s = contract_series<double>(seq, 8);
    return {s.zeta[4] * 24.0, s.kappa[5] * 120.0, s.zeta[6] * 720.0,
            s.kappa[7] * 5040.0, s.zeta[8] * 40320.0};
}

inline DeltaSet bda_deltas(double t1, double alpha) {
    FamilyParams p;
    p.family = Family::bda;
    p.t1 = t1;
    p.alpha = alpha;
    return eval_deltas(build_family(p));
}

inline DeltaSet acb_deltas(double t0, double a1) {
    FamilyParams p;
    p.family = Family::acb;
    p.t0 = t0;
    p.a1 = a1;
    return eval_deltas(build_family(p));
}

// ---------------------------------------------------------------------------
// Scalar root finding and 1-D maximization
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr int root_iteration_cap = 200;

// Bisection on a bracketing interval; tolerances far tighter than the
// 1e-9 residual the optimization results are required to meet.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double flo, double fhi) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NonConvergence("bisect: interval does not bracket a root");
    for (int it = 0; it < root_iteration_cap; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0 || hi - lo < 1e-14 * (1.0 + std::abs(mid))) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// First sign change of f on a uniform scan of [lo, hi].
inline std::optional<double> scan_root(const std::function<double(double)>& f, double lo,
                                       double hi, int cells) {
    double x_prev = lo, f_prev = f(lo);
    for (int i = 1; i <= cells; ++i) {
        double x = lo + (hi - lo) * double(i) / cells;
        double fx = f(x);
        if (std::isfinite(f_prev) && std::isfinite(fx) && (f_prev <= 0.0) != (fx <= 0.0))
            return bisect(f, x_prev, x, f_prev, fx);
        x_prev = x;
        f_prev = fx;
    }
    return std::nullopt;
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < root_iteration_cap && b - a > tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Optimization targets and results
// ---------------------------------------------------------------------------

enum class ConditionId { delta4_unit, delta6_unit, delta5_prime_unit };

struct OptimizationTarget {
    Family family = Family::bda;
    std::vector<ConditionId> conditions;
    bool maximize_delta8 = false;
};

struct OptimizationResult {
    enum class Status { solved, no_real_solution };
    Status status = Status::solved;

    static constexpr double unset = std::numeric_limits<double>::quiet_NaN();
    double alpha = unset;
    double t0 = unset;
    double t1 = unset;
    double a1 = unset;

    double delta4 = unset;
    double delta5p = unset;
    double delta6 = unset;
    double delta7p = unset;
    double delta8 = unset;
    double d_coeff = unset;
    double half_d_squared = unset;

    std::optional<ErrorProfile> profile;
};

namespace detail {

// alpha solving delta6(t1, alpha) = 1 inside the family's [0, 1] range.
inline std::optional<double> bda_alpha_for_sixth_order(double t1) {
    auto f = [&](double alpha) { return bda_deltas(t1, alpha).d6 - 1.0; };
    return scan_root(f, 0.0, 1.0, 64);
}

inline OptimizationResult finish_bda(double t1, double alpha) {
    OptimizationResult r;
    r.t1 = t1;
    r.alpha = alpha;
    DeltaSet d = bda_deltas(t1, alpha);
    r.delta4 = d.d4;
    r.delta5p = d.d5p;
    r.delta6 = d.d6;
    r.delta7p = d.d7p;
    r.delta8 = d.d8;
    r.profile = extract_error_profile(make_bda(t1, alpha));
    r.d_coeff = r.profile->d_coeff;
    r.half_d_squared = 0.5 * r.profile->d_coeff * r.profile->d_coeff;
    return r;
}

} // namespace detail

// alpha = 1/48: cancels the eps^4 defect of the PA-TI family (delta4 = 1).
inline OptimizationResult solve_pa_ti_fourth() {
    auto f = [](double alpha) {
        FamilyParams p;
        p.family = Family::pa_ti;
        p.alpha = alpha;
        return eval_deltas(build_family(p)).d4 - 1.0;
    };
    auto root = detail::scan_root(f, 0.0, 1.0, 64);
    if (!root) throw NonConvergence("pa_ti: no alpha cancels the eps^4 defect");
    OptimizationResult r;
    r.alpha = *root;
    FamilyParams p;
    p.family = Family::pa_ti;
    p.alpha = *root;
    DeltaSet d = eval_deltas(build_family(p));
    r.delta4 = d.d4;
    r.delta6 = d.d6;
    r.profile = extract_error_profile(make_pa_ti(*root));
    return r;
}

// alpha = 1/5: sixth-order thermodynamic energy within the 4A family.
inline OptimizationResult solve_four_a_sixth() {
    auto f = [](double alpha) {
        FamilyParams p;
        p.family = Family::four_a;
        p.alpha = alpha;
        return eval_deltas(build_family(p)).d6 - 1.0;
    };
    auto root = detail::scan_root(f, 0.0, 1.0, 64);
    if (!root) throw NonConvergence("4a: no alpha in [0,1] gives delta6 = 1");
    OptimizationResult r;
    r.alpha = *root;
    FamilyParams p;
    p.family = Family::four_a;
    p.alpha = *root;
    DeltaSet d = eval_deltas(build_family(p));
    r.delta5p = d.d5p;
    r.delta6 = d.d6;
    r.delta8 = d.d8;
    r.profile = extract_error_profile(make_4a(*root));
    return r;
}

// Sixth-order thermodynamic energy with delta8 pushed as close to 1 as the
// family allows: solve delta6(alpha, t1) = 1 for alpha at each t1, then
// maximize delta8 along that curve (coarse grid + golden-section refinement).
inline OptimizationResult solve_bda_max_delta8() {
    const double lo = bda_t1_min() + 1e-4, hi = 0.5 - 1e-4;
    auto objective = [&](double t1) {
        auto alpha = detail::bda_alpha_for_sixth_order(t1);
        return alpha ? bda_deltas(t1, *alpha).d8 : -std::numeric_limits<double>::infinity();
    };
    const int cells = 289; // ~1e-3 spacing
    double best_t1 = lo, best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= cells; ++i) {
        double t1 = lo + (hi - lo) * double(i) / cells;
        double v = objective(t1);
        if (v > best) {
            best = v;
            best_t1 = t1;
        }
    }
    double step = (hi - lo) / cells;
    double t1 = detail::golden_max(objective, std::max(lo, best_t1 - step),
                                   std::min(hi, best_t1 + step), 1e-7);
    auto alpha = detail::bda_alpha_for_sixth_order(t1);
    if (!alpha) throw NonConvergence("bda: delta6 condition unsolvable at the delta8 optimum");
    return detail::finish_bda(t1, *alpha);
}

// Twelfth-order Hamiltonian energy: hold delta6(alpha, t1) = 1 and tune t1
// until delta5' = 1 as well.
inline OptimizationResult solve_bda_twelfth() {
    const double lo = bda_t1_min() + 1e-4, hi = 0.5 - 1e-4;
    auto g = [&](double t1) {
        auto alpha = detail::bda_alpha_for_sixth_order(t1);
        return alpha ? bda_deltas(t1, *alpha).d5p - 1.0 : std::numeric_limits<double>::quiet_NaN();
    };
    auto root = detail::scan_root(g, lo, hi, 400);
    if (!root) {
        OptimizationResult r;
        r.status = OptimizationResult::Status::no_real_solution;
        return r;
    }
    auto alpha = detail::bda_alpha_for_sixth_order(*root);
    if (!alpha) throw NonConvergence("bda: delta6 condition unsolvable at the delta5' root");
    return detail::finish_bda(*root, *alpha);
}

// Same recipe attempted on the ACB (CA) family: along the sixth-order locus
// a1(t0), delta5'(t0) never crosses 1, so no twelfth-order variant exists.
// The scan evidence is returned with the result.
struct AcbScanPoint {
    double t0, a1, delta5p;
};

inline OptimizationResult solve_acb_twelfth(std::vector<AcbScanPoint>* scan_out = nullptr) {
    const double lo = 0.005, hi = 0.495;
    const int cells = 200;
    std::optional<double> prev;
    std::optional<double> prev_t0;
    OptimizationResult r;
    for (int i = 0; i <= cells; ++i) {
        double t0 = lo + (hi - lo) * double(i) / cells;
        auto a1 = detail::scan_root(
            [&](double a) { return acb_deltas(t0, a).d6 - 1.0; }, 0.0, 0.5, 50);
        if (!a1) {
            prev.reset();
            continue;
        }
        double g = acb_deltas(t0, *a1).d5p - 1.0;
        if (scan_out) scan_out->push_back({t0, *a1, g + 1.0});
        if (prev && (*prev <= 0.0) != (g <= 0.0)) {
            // a crossing after all: refine and report it solved
            auto cross = detail::scan_root(
                [&](double t) {
                    auto a = detail::scan_root(
                        [&](double x) { return acb_deltas(t, x).d6 - 1.0; }, 0.0, 0.5, 50);
                    return a ? acb_deltas(t, *a).d5p - 1.0
                             : std::numeric_limits<double>::quiet_NaN();
                },
                *prev_t0, t0, 32);
            if (cross) {
                auto a = detail::scan_root(
                    [&](double x) { return acb_deltas(*cross, x).d6 - 1.0; }, 0.0, 0.5, 50);
                r.t0 = *cross;
                r.a1 = a ? *a : OptimizationResult::unset;
                r.status = OptimizationResult::Status::solved;
                return r;
            }
        }
        prev = g;
        prev_t0 = t0;
    }
    r.status = OptimizationResult::Status::no_real_solution;
    return r;
}

// Sixth-order locus of the CA family: for each a1, the t0 in (0, 1/2) with
// delta6(a1, t0) = 1. The branch connected to the t0 -> 0 (4A-like) limit is
// reported; absent roots are omitted.
struct CaLocusPoint {
    double a1, t0;
};

inline std::vector<CaLocusPoint> ca_sixth_order_locus(const std::vector<double>& a1_values) {
    std::vector<CaLocusPoint> locus;
    for (double a1 : a1_values) {
        if (a1 < 0.0 || a1 > 0.5) throw ParameterOutOfRange("ca locus: a1 must lie in [0, 1/2]");
        auto root = detail::scan_root(
            [&](double t0) { return acb_deltas(t0, a1).d6 - 1.0; }, 0.005, 0.495, 200);
        if (root) locus.push_back({a1, *root});
    }
    return locus;
}

// Dispatch for the condition-list form of the above recipes.
inline OptimizationResult solve_conditions(const OptimizationTarget& target) {
    auto has = [&](ConditionId id) {
        for (ConditionId c : target.conditions)
            if (c == id) return true;
        return false;
    };
    switch (target.family) {
    case Family::pa_ti:
        if (has(ConditionId::delta4_unit) && target.conditions.size() == 1 &&
            !target.maximize_delta8)
            return solve_pa_ti_fourth();
        break;
    case Family::four_a:
        if (has(ConditionId::delta6_unit) && target.conditions.size() == 1 &&
            !target.maximize_delta8)
            return solve_four_a_sixth();
        break;
    case Family::bda:
        if (has(ConditionId::delta6_unit) && target.maximize_delta8 &&
            target.conditions.size() == 1)
            return solve_bda_max_delta8();
        if (has(ConditionId::delta6_unit) && has(ConditionId::delta5_prime_unit) &&
            !target.maximize_delta8)
            return solve_bda_twelfth();
        break;
    case Family::acb:
        if (has(ConditionId::delta5_prime_unit)) return solve_acb_twelfth();
        break;
    case Family::exact:
        break;
    }
    throw ParameterOutOfRange("solve_conditions: unsupported family/condition combination");
}

} // namespace pimc_ho
