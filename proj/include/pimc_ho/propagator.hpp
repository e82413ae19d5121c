#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "pimc_ho/errors.hpp"
#include "pimc_ho/series.hpp"

namespace pimc_ho {

// ---------------------------------------------------------------------------
// Split steps
// ---------------------------------------------------------------------------

enum class StepKind { kinetic, potential };

// One factor of an operator-splitting propagator. A kinetic step carries the
// dimensionless weight a of exp(-a*eps*T). A potential step carries b for
// exp(-b*eps*V) plus c for the double-commutator correction c*eps^3*[V,[T,V]].
// For the harmonic oscillator [V,[T,V]] = x^2 = 2V, so the step acts as a
// single potential shear of weight beta(eps) = b*eps + 2*c*eps^3.
struct Step {
    StepKind kind;
    double a = 0.0; // kinetic weight
    double b = 0.0; // potential weight
    double c = 0.0; // double-commutator weight

    static Step kinetic(double a) { return {StepKind::kinetic, a, 0.0, 0.0}; }
    static Step potential(double b, double c = 0.0) { return {StepKind::potential, 0.0, b, c}; }
};

inline bool steps_equal(const Step& x, const Step& y, double tol) {
    if (x.kind != y.kind) return false;
    return std::abs(x.a - y.a) <= tol && std::abs(x.b - y.b) <= tol && std::abs(x.c - y.c) <= tol;
}

struct StepSequence {
    std::vector<Step> steps;
    std::string label;

    bool palindromic(double tol = 1e-12) const {
        std::size_t n = steps.size();
        for (std::size_t i = 0; i < n / 2; ++i)
            if (!steps_equal(steps[i], steps[n - 1 - i], tol)) return false;
        return true;
    }

    double kinetic_sum() const {
        double s = 0.0;
        for (const Step& st : steps)
            if (st.kind == StepKind::kinetic) s += st.a;
        return s;
    }

    double potential_sum() const {
        double s = 0.0;
        for (const Step& st : steps)
            if (st.kind == StepKind::potential) s += st.b;
        return s;
    }

    // First-order correctness: sum(a_i) = sum(b_i) = 1.
    bool consistent(double tol = 1e-12) const {
        return std::abs(kinetic_sum() - 1.0) <= tol && std::abs(potential_sum() - 1.0) <= tol;
    }

    // Concatenation, e.g. squaring a propagator for doubling checks.
    StepSequence repeated(int times) const {
        StepSequence r;
        r.label = label + "^" + std::to_string(times);
        for (int i = 0; i < times; ++i) r.steps.insert(r.steps.end(), steps.begin(), steps.end());
        return r;
    }
};

// ---------------------------------------------------------------------------
// Named families
// ---------------------------------------------------------------------------

enum class Family { pa_ti, four_a, bda, acb, exact };

struct FamilyParams {
    Family family = Family::pa_ti;
    double alpha = 0.0; // pa_ti, four_a, bda
    double t0 = 0.0;    // acb
    double t1 = 0.0;    // bda
    double a1 = 0.0;    // acb
};

// Parameter sets quoted in the source literature for the named algorithms.
namespace published {
inline constexpr double ti_alpha = 1.0 / 48.0;
inline constexpr double four_a_prime_alpha = 0.2;
inline constexpr double bd_prime_t1 = 0.27564;
inline constexpr double bd_prime_alpha = 0.171438;
inline constexpr double bd_star_alpha = 0.142872;
inline constexpr double bd_star_t1 = 0.264654;
inline constexpr double ca1_t0 = 0.1430;
inline constexpr double ca1_a1 = 0.0;
inline constexpr double ca2_t0 = 0.1215;
inline constexpr double ca2_a1 = 0.33;
} // namespace published

inline double bda_t1_min() { return 0.5 * (1.0 - 1.0 / std::sqrt(3.0)); }

namespace detail {

inline std::string fmt_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

// Builds the literal step sequence of the requested family. The exact
// propagator has no finite splitting; ask make_exact() for it instead.
inline StepSequence build_family(const FamilyParams& p) {
    StepSequence seq;
    switch (p.family) {
    case Family::pa_ti: {
        if (p.alpha < 0.0)
            throw ParameterOutOfRange("pa_ti: alpha must be >= 0");
        seq.label = p.alpha == 0.0 ? "PA" : (p.alpha == published::ti_alpha ? "TI" : "PA-TI(alpha=" + detail::fmt_param(p.alpha) + ")");
        seq.steps = {Step::potential(0.5, p.alpha), Step::kinetic(1.0), Step::potential(0.5, p.alpha)};
        break;
    }
    case Family::four_a: {
        if (p.alpha < 0.0 || p.alpha > 1.0)
            throw ParameterOutOfRange("4a: alpha must lie in [0, 1]");
        seq.label = p.alpha == 0.0 ? "4A" : (p.alpha == published::four_a_prime_alpha ? "4A'" : "4A(alpha=" + detail::fmt_param(p.alpha) + ")");
        // Commutator split: alpha/2 * eps^2/72 on each outer V, (1-alpha) * eps^2/72 inside.
        Step outer = Step::potential(1.0 / 6.0, p.alpha / 144.0);
        Step inner = Step::potential(2.0 / 3.0, (1.0 - p.alpha) / 72.0);
        seq.steps = {outer, Step::kinetic(0.5), inner, Step::kinetic(0.5), outer};
        break;
    }
    case Family::bda: {
        if (p.t1 < bda_t1_min() - 1e-12 || p.t1 > 0.5 + 1e-12)
            throw ParameterOutOfRange("bda: t1 must lie in [(1-1/sqrt(3))/2, 1/2]");
        if (p.alpha < 0.0 || p.alpha > 1.0)
            throw ParameterOutOfRange("bda: alpha must lie in [0, 1]");
        double t1 = p.t1;
        double t2 = 1.0 - 2.0 * t1;
        double v1 = 1.0 / (12.0 * t1 * (1.0 - t1));
        double v0 = 0.5 - v1;
        double u0 = (1.0 / 48.0) * (1.0 / (6.0 * t1 * (1.0 - t1) * (1.0 - t1)) - 1.0);
        seq.label = "BDA(t1=" + detail::fmt_param(t1) + ",alpha=" + detail::fmt_param(p.alpha) + ")";
        Step outer = Step::potential(v0, p.alpha * u0);
        Step inner = Step::potential(v1, (1.0 - p.alpha) * u0);
        seq.steps = {outer, Step::kinetic(t1), inner, Step::kinetic(t2), inner, Step::kinetic(t1), outer};
        break;
    }
    case Family::acb: {
        if (p.t0 <= 0.0 || p.t0 >= 0.5)
            throw ParameterOutOfRange("acb: t0 must lie in (0, 1/2)");
        if (p.a1 < 0.0 || p.a1 > 0.5)
            throw ParameterOutOfRange("acb: a1 must lie in [0, 1/2]");
        double t0 = p.t0;
        double t1 = 0.5 - t0;
        double w = 1.0 - 2.0 * t0;
        double v1 = (1.0 / 6.0) / (w * w);
        double v2 = 1.0 - 2.0 * v1;
        double u0 = (1.0 / 12.0) * (1.0 - 1.0 / w + 1.0 / (6.0 * w * w * w));
        seq.label = "ACB(t0=" + detail::fmt_param(t0) + ",a1=" + detail::fmt_param(p.a1) + ")";
        // The literature parameterizes the commutator split by a1 = alpha/2.
        Step inner = Step::potential(v1, p.a1 * u0);
        Step middle = Step::potential(v2, (1.0 - 2.0 * p.a1) * u0);
        seq.steps = {Step::kinetic(t0), inner, Step::kinetic(t1), middle,
                     Step::kinetic(t1), inner, Step::kinetic(t0)};
        break;
    }
    case Family::exact:
        throw ParameterOutOfRange("the exact propagator is not a finite step sequence");
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

// Merges exp(-a T) exp(-b V) exp(-c T) into exp(-nu V) exp(-kappa T) exp(-mu V).
template <class T>
struct PairContraction {
    T kappa, nu, mu;
};

template <class T>
PairContraction<T> contract_pair(const T& a, const T& b, const T& c) {
    T kappa = a + a * b * c + c;
    if (is_scalar_zero(kappa))
        throw ContractionSingularity("pair contraction: kappa vanished");
    return {kappa, b * c / kappa, b * a / kappa};
}

// 2x2 unit-determinant shear realization of the propagator algebra:
// a kinetic factor maps to [[1, a*eps], [0, 1]] and a potential factor
// to [[1, 0], [beta, 1]]. The half-trace of the ordered product is zeta_1,
// the upper-right entry kappa_1.
template <class T>
struct ShearMatrix {
    T m00, m01, m10, m11;
};

template <class T>
ShearMatrix<T> contract_to_matrix(const StepSequence& seq, const T& eps) {
    T one = embed_scalar(1.0, eps), zero = embed_scalar(0.0, eps);
    ShearMatrix<T> m{one, zero, zero, one};
    T eps3 = eps * eps * eps;
    for (const Step& st : seq.steps) {
        if (st.kind == StepKind::kinetic) {
            // right-multiply by [[1, a*eps], [0, 1]]
            T w = embed_scalar(st.a, eps) * eps;
            m.m01 = m.m01 + m.m00 * w;
            m.m11 = m.m11 + m.m10 * w;
        } else {
            // right-multiply by [[1, 0], [beta, 1]], beta = b*eps + 2c*eps^3
            T beta = embed_scalar(st.b, eps) * eps + embed_scalar(2.0 * st.c, eps) * eps3;
            m.m00 = m.m00 + m.m01 * beta;
            m.m10 = m.m10 + m.m11 * beta;
        }
    }
    return m;
}

// Scalar contraction of a palindromic sequence at a fixed step size.
struct ScalarContraction {
    double zeta, kappa, mu;
};

inline ScalarContraction contract(const StepSequence& seq, double eps) {
    if (!seq.palindromic())
        throw NonPalindromicSequence("contract: step sequence is not palindromic");
    ShearMatrix<double> m = contract_to_matrix(seq, eps);
    if (m.m01 <= 0.0)
        throw ContractionSingularity("contract: kappa_1 <= 0 at eps=" + detail::fmt_param(eps));
    return {m.m00, m.m01, (m.m00 - 1.0) / m.m01};
}

// Full series contraction; exact whenever `order` covers the polynomial
// degree of the sequence (shear entries are polynomials in eps).
template <class T>
struct SeriesContraction {
    Series<T> zeta, kappa;
};

template <class T = double>
SeriesContraction<T> contract_series(const StepSequence& seq, int order) {
    if (!seq.palindromic())
        throw NonPalindromicSequence("contract_series: step sequence is not palindromic");
    ShearMatrix<Series<T>> m = contract_to_matrix(seq, Series<T>::variable(order));
    return {m.m00, m.m01};
}

inline int sequence_degree(const StepSequence& seq) {
    int d = 0;
    for (const Step& st : seq.steps)
        d += (st.kind == StepKind::kinetic) ? 1 : (st.c != 0.0 ? 3 : 1);
    return d;
}

// ---------------------------------------------------------------------------
// Contracted propagator
// ---------------------------------------------------------------------------

// Canonical single-T form exp(-mu1 V) exp(-kappa1 T) exp(-mu1 V). For finite
// step sequences zeta_1 and kappa_1 are stored as exact polynomials in eps
// (computed once by series contraction), so scalar evaluation, series
// extraction and the analytic derivative all share one set of coefficients.
// The exact propagator (zeta_1 = cosh eps, kappa_1 = sinh eps) is kept in
// closed form.
class ContractedPropagator {
public:
    static ContractedPropagator from_sequence(const StepSequence& seq) {
        ContractedPropagator p;
        p.label_ = seq.label;
        p.seq_ = seq;
        int degree = sequence_degree(seq);
        SeriesContraction<double> s = contract_series<double>(seq, degree);
        p.zeta_minus_one_ = trim(s.zeta.coeffs(), 1);
        p.zeta_minus_one_[0] = 0.0; // store zeta - 1; constant term is identically 1
        p.kappa_ = trim(s.kappa.coeffs(), 1);
        p.dzeta_ = derivative_of(p.zeta_minus_one_);
        return p;
    }

    static ContractedPropagator exact() {
        ContractedPropagator p;
        p.label_ = "exact";
        p.exact_ = true;
        return p;
    }

    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }
    bool is_exact() const { return exact_; }
    const std::optional<StepSequence>& sequence() const { return seq_; }

    double eps_max() const { return eps_max_; }
    void set_eps_max(double v) { eps_max_ = v; }

    // zeta_1(eps) - 1, evaluated without cancellation at small eps.
    double zeta_minus_one(double eps) const {
        if (exact_) {
            double s = std::sinh(0.5 * eps);
            return 2.0 * s * s;
        }
        return eval_poly(zeta_minus_one_, eps);
    }

    double zeta1(double eps) const { return 1.0 + zeta_minus_one(eps); }

    double kappa1(double eps) const {
        return exact_ ? std::sinh(eps) : eval_poly(kappa_, eps);
    }

    double mu1(double eps) const {
        if (exact_) return std::tanh(0.5 * eps);
        double k = kappa1(eps);
        if (k == 0.0) throw ContractionSingularity("mu1: kappa_1 vanished");
        return zeta_minus_one(eps) / k;
    }

    double dzeta1(double eps) const {
        return exact_ ? std::sinh(eps) : eval_poly(dzeta_, eps);
    }

    Series<double> zeta_series(int order = default_truncation_order) const {
        if (exact_) return series_cosh_ref<double>(order);
        Series<double> s = Series<double>::constant(1.0, order);
        for (int k = 1; k <= order && k < static_cast<int>(zeta_minus_one_.size()); ++k)
            s.at(k) = zeta_minus_one_[static_cast<std::size_t>(k)];
        return s;
    }

    Series<double> kappa_series(int order = default_truncation_order) const {
        if (exact_) return series_sinh_ref<double>(order);
        Series<double> s = Series<double>::constant(0.0, order);
        for (int k = 0; k <= order && k < static_cast<int>(kappa_.size()); ++k)
            s.at(k) = kappa_[static_cast<std::size_t>(k)];
        return s;
    }

    // Re-contracts the stored sequence in the requested scalar type; used by
    // the extended-precision analysis backend.
    template <class T>
    SeriesContraction<T> contract_in(int order) const {
        if (exact_) return {series_cosh_ref<T>(order), series_sinh_ref<T>(order)};
        return contract_series<T>(*seq_, order);
    }

private:
    static std::vector<double> trim(std::vector<double> v, std::size_t keep_at_least) {
        while (v.size() > keep_at_least && v.back() == 0.0) v.pop_back();
        return v;
    }

    static std::vector<double> derivative_of(const std::vector<double>& v) {
        std::vector<double> d(v.size() > 1 ? v.size() - 1 : 1, 0.0);
        for (std::size_t k = 1; k < v.size(); ++k) d[k - 1] = double(k) * v[k];
        return d;
    }

    static double eval_poly(const std::vector<double>& v, double x) {
        double acc = 0.0;
        for (std::size_t i = v.size(); i-- > 0;) acc = acc * x + v[i];
        return acc;
    }

    std::string label_;
    bool exact_ = false;
    std::optional<StepSequence> seq_;
    std::vector<double> zeta_minus_one_{0.0};
    std::vector<double> kappa_{0.0};
    std::vector<double> dzeta_{0.0};
    double eps_max_ = 3.0; // validity range; beyond it results are extrapolated
};

inline ContractedPropagator contract(const StepSequence& seq) {
    return ContractedPropagator::from_sequence(seq);
}

// Convenience constructors for the named propagators.
inline ContractedPropagator make_pa() { return contract(build_family({Family::pa_ti, 0.0})); }
inline ContractedPropagator make_ti() { return contract(build_family({Family::pa_ti, published::ti_alpha})); }
inline ContractedPropagator make_pa_ti(double alpha) { return contract(build_family({Family::pa_ti, alpha})); }
inline ContractedPropagator make_4a(double alpha = 0.0) {
    FamilyParams p;
    p.family = Family::four_a;
    p.alpha = alpha;
    return contract(build_family(p));
}
inline ContractedPropagator make_4a_prime() { return make_4a(published::four_a_prime_alpha); }
inline ContractedPropagator make_bda(double t1, double alpha) {
    FamilyParams p;
    p.family = Family::bda;
    p.t1 = t1;
    p.alpha = alpha;
    return contract(build_family(p));
}
inline ContractedPropagator make_bd_prime() {
    ContractedPropagator p = make_bda(published::bd_prime_t1, published::bd_prime_alpha);
    p.set_label("BD'");
    return p;
}
inline ContractedPropagator make_bd_star() {
    ContractedPropagator p = make_bda(published::bd_star_t1, published::bd_star_alpha);
    p.set_label("BD*");
    return p;
}
inline ContractedPropagator make_acb(double t0, double a1) {
    FamilyParams p;
    p.family = Family::acb;
    p.t0 = t0;
    p.a1 = a1;
    return contract(build_family(p));
}
inline ContractedPropagator make_ca1() {
    ContractedPropagator p = make_acb(published::ca1_t0, published::ca1_a1);
    p.set_label("CA1");
    return p;
}
inline ContractedPropagator make_ca2() {
    ContractedPropagator p = make_acb(published::ca2_t0, published::ca2_a1);
    p.set_label("CA2");
    return p;
}
inline ContractedPropagator make_exact() { return ContractedPropagator::exact(); }

} // namespace pimc_ho
