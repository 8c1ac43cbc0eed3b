#include "doctest.h"
#include "support.hpp"

#include "sjl/errors.hpp"
#include "sjl/oracle.hpp"
#include "sjl/parallel.hpp"
#include "sjl/row_bound.hpp"

#include <cmath>
#include <numbers>

using namespace sjl;

TEST_CASE("params validation") {
    CHECK_NOTHROW(make_params(1000, 100, 1, 0.3));
    CHECK_THROWS_AS(make_params(1000, 100, 101, 0.3), DomainError);
    CHECK_THROWS_AS(make_params(1000, 100, 51, 0.3), DomainError);  // p > 1/2
    CHECK_THROWS_AS(make_params(1000, 100, 0, 0.3), DomainError);
    CHECK_THROWS_AS(make_params(100, 10, 1, 0.05), DomainError);  // v < 1/sqrt(n)
    CHECK_THROWS_AS(make_params(100, 10, 1, 1.5), DomainError);
    CHECK_THROWS_AS(make_params(1, 10, 1, 1.0), DomainError);
    CHECK_NOTHROW(make_params(100, 10, 5, 0.1));  // boundary p = 1/2, v = 1/sqrt(n)
    CHECK(make_params(1000, 100, 3, 0.3).p() == make_rational(3, 100));
    CHECK_THROWS_AS(row_moment_bound(make_params(1000, 100, 1, 0.3), 3), ArgumentError);
}

TEST_CASE("d = 2 gives 4p on a grid") {
    CounterRng rng(21, 0);
    for (int c = 0; c < 100; ++c) {
        const std::uint64_t n = 2 + rng.below(1000000);
        const Rational p = test::random_p(rng);
        const double v = test::random_dispersion(n, rng);
        CAPTURE(n);
        CAPTURE(v);
        CHECK(test::rel_diff(row_moment_bound(n, p, v, 2), 4.0 * to_double(p)) <= 1e-12);
    }
    CHECK(row_moment_bound(1000, make_rational(1, 4), 1.0, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(row_moment_bound(1000, make_rational(1, 100), 0.3, 2) == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("n = 4, p = 1/2, v = 0.8, d = 4 against enumeration") {
    // Oracle: literal enumeration of the 3^4 outcomes at x*, then 4 |S|_4^2.
    const auto x = worst_case_vector(4, 0.8);
    const double oracle = 4.0 * std::sqrt(enumerate_linear_moment(x, 0.5, 4));
    CHECK(oracle == doctest::Approx(3.1919899749215994).epsilon(1e-14));
    CHECK(test::rel_diff(row_moment_bound(4, make_rational(1, 2), 0.8, 4), 3.1919899749215994) <= 1e-13);
}

TEST_CASE("row bound equals 4 |S(x*)|_d^2 computed exactly") {
    CounterRng rng(22, 0);
    for (int c = 0; c < 40; ++c) {
        const std::uint64_t n = 2 + rng.below(7);
        const Rational p = test::random_p(rng);
        // rational v^2 in [1/n, 1]
        const std::uint64_t k = 1 + rng.below(8 * n);
        Rational v2 = make_rational(k, 8 * n);
        if (v2 * static_cast<unsigned long>(n) < 1) v2 = make_rational(1, n);
        const auto u = worst_case_weights(n, v2);
        for (int d = 2; d <= 8; d += 2) {
            const double exact = 4.0 * std::pow(moment_norm(exact_linear_moment(u, p, d), d), 2);
            CAPTURE(n);
            CAPTURE(d);
            CHECK(test::rel_diff(row_moment_bound(n, p, std::sqrt(to_double(v2)), d), exact) <= 1e-12);
        }
    }
}

// Dependence on v follows the kurtosis 1/p of Y against the Gaussian value 3:
// E S(x*)^4 = 3p^2 + (p - 3p^2) sum_i u_i^2 and sum_i u_i^2 grows with v. For
// small p the bound grows with v; for p > 1/3 it shrinks at every order; in
// between it depends on d.
TEST_CASE("row bound dependence on v") {
    CounterRng rng(26, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        const std::uint64_t n = 2 + rng.below(100000);
        const double v1 = test::random_dispersion(n, rng);
        const double v2 = v1 + (1.0 - v1) * rng.uniform();
        const Rational small_p = make_rational(1, 32 + rng.below(1000));
        const Rational large_p = make_rational(1, 3) + make_rational(1 + rng.below(100), 600);
        const auto a = row_moment_bounds(n, small_p, v1, 16);
        const auto b = row_moment_bounds(n, small_p, v2, 16);
        const auto c1 = row_moment_bounds(n, large_p, v1, 16);
        const auto c2 = row_moment_bounds(n, large_p, v2, 16);
        CAPTURE(n);
        CAPTURE(v1);
        CAPTURE(v2);
        for (int d = 2; d <= 16; d += 2) {
            CHECK(b[d] >= a[d] * (1 - 1e-12));
            CHECK(c2[d] <= c1[d] * (1 + 1e-12));
        }
    }
    // d = 4 closed form at the crossover p = 1/3: no dependence on v at all
    const Rational third = make_rational(1, 3);
    CHECK(row_moment_bound(50, third, 0.2, 4) == doctest::Approx(row_moment_bound(50, third, 0.9, 4)).epsilon(1e-13));
}

TEST_CASE("row bound is monotone in p and in d") {
    CounterRng rng(23, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        const std::uint64_t n = 2 + rng.below(100000);
        const double v = test::random_dispersion(n, rng);
        const Rational p = test::random_p(rng);
        const Rational p2 = p + (make_rational(1, 2) - p) * make_rational(1 + rng.below(8), 8);
        const auto a = row_moment_bounds(n, p, v, 16);
        const auto b = row_moment_bounds(n, p2, v, 16);
        CAPTURE(n);
        CAPTURE(v);
        CAPTURE(to_string(p));
        for (int d = 2; d <= 16; d += 2) {
            CHECK(b[d] >= a[d] * (1 - 1e-12));
            if (d > 2) CHECK(a[d] >= a[d - 2] * (1 - 1e-12));  // moment norms grow with the order
        }
    }
}

TEST_CASE("baseline closed forms") {
    CHECK(baseline_row_bound(4, 0.01, 0.3, BaselineVariant::D2) ==
          doctest::Approx(2.0 * 8.0 * 4.0 / std::log(100.0)).epsilon(1e-14));
    // 64 / ln(100) = 13.8974; the often-quoted 13.8985 is a rounding slip
    CHECK(baseline_row_bound(4, 0.01, 0.3, BaselineVariant::D2) == doctest::Approx(13.8985).epsilon(1e-4));
    CounterRng rng(24, 0);
    for (int c = 0; c < 50; ++c) {
        const double p = 1e-4 + 0.5 * rng.uniform();
        const double v = 0.01 + 0.99 * rng.uniform();
        CHECK(test::rel_diff(baseline_row_bound(2, p, v, BaselineVariant::D1), 16.0 * std::numbers::e * p) <= 1e-12);
        CHECK(baseline_sup_argument(2, p, v) == 1.0);
    }
    CHECK(baseline_row_bound(4, 1.0, 0.1, BaselineVariant::Best) == baseline_row_bound(4, 1.0, 0.1, BaselineVariant::D1));
    CHECK_THROWS_AS(baseline_row_bound(4, 1.0, 0.1, BaselineVariant::D2), DomainError);
    CHECK_THROWS_AS(baseline_row_bound(4, 0.0, 0.1, BaselineVariant::D1), DomainError);
}

TEST_CASE("baseline supremum argument is the maximiser") {
    CounterRng rng(25, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        const int d = 2 * (1 + static_cast<int>(rng.below(20)));
        const double p = std::exp(std::log(1e-4) * rng.uniform());
        const double v = std::exp(std::log(1e-3) * rng.uniform());
        auto f = [&](double t) { return (d * v / t) * std::pow(p / (d * v * v), 1.0 / (2.0 * t)); };
        const double t_star = baseline_sup_argument(d, p, v);
        CHECK(t_star >= 1.0);
        CHECK(t_star <= d / 2.0);
        for (int i = 0; i <= 200; ++i) {
            const double t = 1.0 + (d / 2.0 - 1.0) * i / 200.0;
            CHECK(f(t) <= f(t_star) * (1 + 1e-12));
        }
    }
}

TEST_CASE("ratio grid: closed form cell, edge cases and dominance") {
    const std::vector<double> p{0.01}, v{0.3}, d{2};
    const auto rows = ratio_grid(10000, p, v, d);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].supported);
    CHECK(rows[0].ratio == doctest::Approx(1.0 / (4.0 * std::numbers::e)).epsilon(1e-12));
    CHECK(rows[0].ratio == doctest::Approx(0.0920).epsilon(1e-3));

    CHECK(ratio_grid(10000, std::vector<double>{}, v, d).empty());
    CHECK(ratio_grid(10000, p, v, std::vector<double>{}).empty());

    const auto bad = ratio_grid(10000, std::vector<double>{0.7}, v, d);
    REQUIRE(bad.size() == 1);
    CHECK_FALSE(bad[0].supported);
    CHECK(std::isnan(bad[0].t_new));
    const auto low_v = ratio_grid(10000, p, std::vector<double>{0.001}, d);
    CHECK_FALSE(low_v[0].supported);

    CHECK_THROWS_AS(ratio_grid(10000, std::vector<double>{-0.1}, v, d), DomainError);
    CHECK_THROWS_AS(ratio_grid(10000, p, v, std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("ratio grid interpolates odd orders") {
    const std::vector<double> p{0.01, 0.2}, v{0.05, 0.5};
    const auto even = ratio_grid(10000, p, v, std::vector<double>{4, 6});
    const auto odd = ratio_grid(10000, p, v, std::vector<double>{5});
    REQUIRE(odd.size() == 4);
    for (std::size_t cell = 0; cell < 4; ++cell) {
        const auto& a = even[cell];
        const auto& b = even[4 + cell];
        CHECK(odd[cell].d == 5);
        CHECK(odd[cell].t_new == doctest::Approx(0.5 * (a.t_new + b.t_new)));
        CHECK(odd[cell].ratio == doctest::Approx(0.5 * (a.ratio + b.ratio)));
    }
}

TEST_CASE("ratio grid row-major order and serial equality") {
    std::vector<double> p, v, d;
    for (int i = 0; i < 5; ++i) p.push_back(1e-3 * std::pow(500.0, i / 4.0));
    for (int i = 0; i < 6; ++i) v.push_back(0.01 * std::pow(100.0, i / 5.0));
    for (int k = 2; k <= 12; k += 1) d.push_back(k);
    const auto serial = ratio_grid_serial(10000, p, v, d);
    set_thread_count(4);
    const auto parallel = ratio_grid(10000, p, v, d);
    set_thread_count(0);
    REQUIRE(serial.size() == p.size() * v.size() * d.size());
    REQUIRE(parallel.size() == serial.size());
    std::size_t i = 0;
    for (double dd : d) {
        for (double pp : p) {
            for (double vv : v) {
                CHECK(serial[i].d == dd);
                CHECK(serial[i].p == pp);
                CHECK(serial[i].v == vv);
                CHECK(parallel[i].t_new == serial[i].t_new);
                CHECK(parallel[i].t_old == serial[i].t_old);
                CHECK(parallel[i].supported == serial[i].supported);
                if (serial[i].supported) CHECK(serial[i].ratio <= 1.0);
                ++i;
            }
        }
    }
}
