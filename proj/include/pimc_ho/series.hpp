#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "pimc_ho/dd.hpp"
#include "pimc_ho/errors.hpp"

namespace pimc_ho {

// One above the highest exponent the analysis routines ever report on.
inline constexpr int default_truncation_order = 14;

// Truncated power series in one formal variable, coefficients c[k] * eps^k.
// Operations on operands of different truncation order truncate to the
// smaller one, so no coefficient is ever reported that is not fully
// determined by both inputs.
template <class T>
class Series {
public:
    Series() : c_(1, T(0)) {}
    explicit Series(std::vector<T> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.assign(1, T(0));
    }

    static Series constant(T value, int order) {
        Series s;
        s.c_.assign(static_cast<std::size_t>(order) + 1, T(0));
        s.c_[0] = value;
        return s;
    }

    // The formal variable itself: 0 + 1*eps.
    static Series variable(int order) {
        Series s = constant(T(0), order);
        if (order >= 1) s.c_[1] = T(1);
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<T>& coeffs() const { return c_; }
    T operator[](int k) const { return k <= order() ? c_[static_cast<std::size_t>(k)] : T(0); }
    T& at(int k) { return c_.at(static_cast<std::size_t>(k)); }

    Series truncated(int new_order) const {
        Series s;
        s.c_.assign(static_cast<std::size_t>(new_order) + 1, T(0));
        for (int k = 0; k <= std::min(new_order, order()); ++k) s.c_[k] = c_[k];
        return s;
    }

    T eval(T x) const {
        T acc = T(0);
        for (int k = order(); k >= 0; --k) acc = acc * x + c_[static_cast<std::size_t>(k)];
        return acc;
    }

    Series derivative() const {
        if (order() == 0) return constant(T(0), 0);
        Series s;
        s.c_.resize(c_.size() - 1);
        for (int k = 1; k <= order(); ++k) s.c_[k - 1] = c_[k] * T(double(k));
        return s;
    }

    // Drops coefficients 0..(shift-1) and reindexes; used to factor out
    // known leading powers of eps before division or square roots.
    Series shifted_down(int shift) const {
        Series s;
        s.c_.assign(c_.size() > static_cast<std::size_t>(shift)
                        ? c_.size() - static_cast<std::size_t>(shift)
                        : 1,
                    T(0));
        for (int k = shift; k <= order(); ++k) s.c_[k - shift] = c_[k];
        return s;
    }

private:
    std::vector<T> c_;
};

template <class T>
Series<T> series_add(const Series<T>& a, const Series<T>& b) {
    int n = std::min(a.order(), b.order());
    Series<T> r = Series<T>::constant(T(0), n);
    for (int k = 0; k <= n; ++k) r.at(k) = a[k] + b[k];
    return r;
}

template <class T>
Series<T> series_sub(const Series<T>& a, const Series<T>& b) {
    int n = std::min(a.order(), b.order());
    Series<T> r = Series<T>::constant(T(0), n);
    for (int k = 0; k <= n; ++k) r.at(k) = a[k] - b[k];
    return r;
}

template <class T>
Series<T> series_mul(const Series<T>& a, const Series<T>& b) {
    int n = std::min(a.order(), b.order());
    Series<T> r = Series<T>::constant(T(0), n);
    for (int k = 0; k <= n; ++k) {
        T acc = T(0);
        for (int j = 0; j <= k; ++j) acc += a[j] * b[k - j];
        r.at(k) = acc;
    }
    return r;
}

template <class T>
Series<T> series_div(const Series<T>& a, const Series<T>& b) {
    if (b[0] == T(0))
        throw DivisionBySingularSeries("series division by a series with zero constant term");
    int n = std::min(a.order(), b.order());
    Series<T> q = Series<T>::constant(T(0), n);
    for (int k = 0; k <= n; ++k) {
        T acc = a[k];
        for (int j = 0; j < k; ++j) acc -= q[j] * b[k - j];
        q.at(k) = acc / b[0];
    }
    return q;
}

template <class T>
Series<T> series_sqrt(const Series<T>& a) {
    if (!(a[0] > T(0)))
        throw NegativeLeadingTerm("series square root requires a positive constant term");
    using std::sqrt;
    int n = a.order();
    Series<T> s = Series<T>::constant(T(0), n);
    s.at(0) = sqrt(a[0]);
    T twice_s0 = s[0] + s[0];
    for (int k = 1; k <= n; ++k) {
        T acc = a[k];
        for (int j = 1; j < k; ++j) acc -= s[j] * s[k - j];
        s.at(k) = acc / twice_s0;
    }
    return s;
}

template <class T>
Series<T> operator+(const Series<T>& a, const Series<T>& b) { return series_add(a, b); }
template <class T>
Series<T> operator-(const Series<T>& a, const Series<T>& b) { return series_sub(a, b); }
template <class T>
Series<T> operator*(const Series<T>& a, const Series<T>& b) { return series_mul(a, b); }
template <class T>
Series<T> operator/(const Series<T>& a, const Series<T>& b) { return series_div(a, b); }

template <class T>
Series<T> operator*(T x, const Series<T>& a) {
    Series<T> r = a;
    for (int k = 0; k <= r.order(); ++k) r.at(k) = x * r.at(k);
    return r;
}

template <class T>
Series<T> operator+(T x, const Series<T>& a) {
    Series<T> r = a;
    r.at(0) = x + r.at(0);
    return r;
}

// Embedding of a plain double into the scalar type used by a computation,
// shaped like `model` (a constant series when the scalar is a series).
template <class T>
T embed_scalar(double v, const T&) {
    return T(v);
}

template <class T>
Series<T> embed_scalar(double v, const Series<T>& model) {
    return Series<T>::constant(T(v), model.order());
}

template <class T>
bool is_scalar_zero(const T& v) {
    return v == T(0);
}

template <class T>
bool is_scalar_zero(const Series<T>& s) {
    for (int k = 0; k <= s.order(); ++k)
        if (!(s[k] == T(0))) return false;
    return true;
}

// Maclaurin series of cosh(eps): 1/(2k)! in the even slots.
template <class T = double>
Series<T> series_cosh_ref(int order) {
    Series<T> s = Series<T>::constant(T(0), order);
    T coeff = T(1);
    s.at(0) = coeff;
    for (int k = 1; k <= order; ++k) {
        coeff = coeff / T(double(k));
        if (k % 2 == 0) s.at(k) = coeff;
    }
    return s;
}

// Maclaurin series of sinh(eps): 1/(2k+1)! in the odd slots.
template <class T = double>
Series<T> series_sinh_ref(int order) {
    Series<T> s = Series<T>::constant(T(0), order);
    T coeff = T(1);
    for (int k = 1; k <= order; ++k) {
        coeff = coeff / T(double(k));
        if (k % 2 == 1) s.at(k) = coeff;
    }
    return s;
}

} // namespace pimc_ho
