#include <doctest.h>

#include <cmath>
#include <random>

#include "pimc_ho/dd.hpp"
#include "pimc_ho/series.hpp"

using namespace pimc_ho;

namespace {

// small-coefficient series: order-1 constant term, higher coefficients well
// below it, so reciprocals stay well conditioned
Series<double> random_series(std::mt19937& rng, int order) {
    std::uniform_real_distribution<double> head(0.5, 1.5);
    std::uniform_real_distribution<double> tail(-0.25, 0.25);
    Series<double> s = Series<double>::constant(head(rng), order);
    for (int k = 1; k <= order; ++k) s.at(k) = tail(rng);
    return s;
}

void check_close(const Series<double>& a, const Series<double>& b, double tol) {
    REQUIRE(a.order() == b.order());
    for (int k = 0; k <= a.order(); ++k)
        CHECK(std::abs(a[k] - b[k]) <= tol);
}

} // namespace

TEST_CASE("series: difference of squares") {
    auto eps = Series<double>::variable(4);
    auto one = Series<double>::constant(1.0, 4);
    auto prod = (one + eps) * (one - eps);
    CHECK(prod[0] == 1.0);
    CHECK(prod[1] == 0.0);
    CHECK(prod[2] == -1.0);
    CHECK(prod[3] == 0.0);
    CHECK(prod[4] == 0.0);
}

TEST_CASE("series: sqrt of a perfect square") {
    auto eps = Series<double>::variable(4);
    auto one = Series<double>::constant(1.0, 4);
    auto square = one + 2.0 * eps + eps * eps;
    auto root = series_sqrt(square);
    check_close(root, one + eps, 1e-15);
}

TEST_CASE("series: geometric series from division") {
    auto eps = Series<double>::variable(3);
    auto one = Series<double>::constant(1.0, 3);
    auto inv = one / (one - eps);
    for (int k = 0; k <= 3; ++k) CHECK(inv[k] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("series: cosh and sinh reference expansions") {
    auto c = series_cosh_ref<double>(4);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 0.0);
    CHECK(c[2] == doctest::Approx(0.5));
    CHECK(c[3] == 0.0);
    CHECK(c[4] == doctest::Approx(1.0 / 24.0));

    auto s = series_sinh_ref<double>(5);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 1.0);
    CHECK(s[3] == doctest::Approx(1.0 / 6.0));
    CHECK(s[5] == doctest::Approx(1.0 / 120.0));

    auto c0 = series_cosh_ref<double>(0);
    CHECK(c0.order() == 0);
    CHECK(c0[0] == 1.0);
}

TEST_CASE("series: hyperbolic identity cosh^2 - sinh^2 = 1") {
    const int order = 14;
    auto c = series_cosh_ref<double>(order);
    auto s = series_sinh_ref<double>(order);
    auto lhs = c * c - s * s;
    CHECK(std::abs(lhs[0] - 1.0) <= 1e-16);
    for (int k = 1; k <= order; ++k) CHECK(std::abs(lhs[k]) <= 1e-16);
}

TEST_CASE("series: hyperbolic identity in the compensated backend") {
    const int order = 14;
    auto c = series_cosh_ref<DoubleDouble>(order);
    auto s = series_sinh_ref<DoubleDouble>(order);
    auto lhs = c * c - s * s;
    CHECK(std::abs(double(lhs[0]) - 1.0) <= 1e-30);
    for (int k = 1; k <= order; ++k) CHECK(std::abs(double(lhs[k])) <= 1e-30);
}

TEST_CASE("series: reciprocal inverts multiplication") {
    std::mt19937 rng(12345);
    auto one = Series<double>::constant(1.0, 10);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_series(rng, 10);
        auto inv = one / a;
        auto prod = a * inv;
        CHECK(std::abs(prod[0] - 1.0) <= 1e-13);
        for (int k = 1; k <= 10; ++k) CHECK(std::abs(prod[k]) <= 1e-13);
    }
}

TEST_CASE("series: add/mul are associative and commutative") {
    std::mt19937 rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_series(rng, 8);
        auto b = random_series(rng, 8);
        auto c = random_series(rng, 8);
        check_close(a + b, b + a, 1e-15);
        check_close(a * b, b * a, 1e-15);
        check_close((a + b) + c, a + (b + c), 1e-13);
        check_close((a * b) * c, a * (b * c), 1e-13);
    }
}

TEST_CASE("series: mixed truncation orders truncate to the smaller") {
    auto a = Series<double>::variable(8);
    auto b = Series<double>::constant(1.0, 4);
    CHECK((a * b).order() == 4);
    CHECK((a + b).order() == 4);
}

TEST_CASE("series: error conditions") {
    auto eps = Series<double>::variable(4);
    auto one = Series<double>::constant(1.0, 4);
    CHECK_THROWS_AS((void)(one / eps), DivisionBySingularSeries);
    CHECK_THROWS_AS((void)series_sqrt(Series<double>::constant(-1.0, 4) + eps),
                    NegativeLeadingTerm);
    CHECK_THROWS_AS((void)series_sqrt(eps), NegativeLeadingTerm);
}

TEST_CASE("double-double: basic arithmetic sanity") {
    DoubleDouble a(1.0), b(1e-20);
    DoubleDouble s = a + b;
    CHECK(double(s - a) == doctest::Approx(1e-20).epsilon(1e-10));
    DoubleDouble t = sqrt(DoubleDouble(2.0));
    CHECK(std::abs(double(t * t - DoubleDouble(2.0))) < 1e-30);
}
