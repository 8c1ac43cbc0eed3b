#include "doctest.h"
#include "support.hpp"

#include "sjl/errors.hpp"
#include "sjl/moment_engine.hpp"
#include "sjl/oracle.hpp"
#include "sjl/rational.hpp"

#include <cfloat>

using namespace sjl;

namespace {
Rational q(long a, long b) {
    Rational r(a, b);
    r.canonicalize();
    return r;
}
}  // namespace

TEST_CASE("to_double rounds to nearest") {
    CHECK(to_double(q(1, 3)) == 1.0 / 3.0);
    CHECK(to_double(q(2, 3)) == 2.0 / 3.0);
    CHECK(to_double(q(1, 10)) == 0.1);
    // 1 + 2^-53 + 2^-80 lies just above the midpoint, so it rounds up.
    Rational above = 1 + Rational(1) / (BigInt(1) << 53) + Rational(1) / (BigInt(1) << 80);
    CHECK(to_double(above) == 1.0 + DBL_EPSILON);
    CHECK(exact_rational(0.1) != q(1, 10));
    CHECK(to_double(exact_rational(0.1)) == 0.1);
    CHECK_THROWS_AS(make_rational(1, 0), ArgumentError);
    CHECK(binomial(10, 3) == 120);
}

TEST_CASE("trinary moments") {
    CHECK(trinary_moments(q(1, 2), 4) == std::vector<Rational>{1, 0, q(1, 2), 0, q(1, 2)});
    CHECK(trinary_moments(q(1, 4), 2) == std::vector<Rational>{1, 0, q(1, 4)});
    CHECK_THROWS_AS(trinary_moments(q(3, 5), 2), DomainError);
    CHECK_THROWS_AS(trinary_moments(Rational(0), 2), DomainError);
    CHECK_THROWS_AS(trinary_moments(q(1, 4), 3), ArgumentError);
    CHECK_THROWS_AS(trinary_moments(q(1, 4), 0), ArgumentError);
    try {
        TrinaryLaw law(q(3, 5));
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
}

TEST_CASE("sum moments: small worked case") {
    const auto t = sum_moments(q(1, 2), 2, 4);
    CHECK(t.raw[4] == q(5, 2));
    CHECK(t.raw[2] == 1);
    CHECK(t.max_order() == 4);
    CHECK_THROWS_AS(sum_moments(q(1, 2), 0, 4), ArgumentError);
}

TEST_CASE("cumulant round trip and additivity") {
    CounterRng rng(11, 0);
    for (int c = 0; c < 50; ++c) {
        const Rational p = test::random_p(rng);
        const auto raw = trinary_moments(p, 12);
        CHECK(cumulants_to_raw(raw_to_cumulants(raw)) == raw);
        const auto kappa = raw_to_cumulants(raw);
        CHECK(kappa[2] == p);
        for (std::size_t j = 1; j < kappa.size(); j += 2) CHECK(kappa[j] == 0);
        // S_{a+b} has cumulants kappa_a + kappa_b
        const std::uint64_t a = 1 + rng.below(20), b = 1 + rng.below(20);
        const auto ka = raw_to_cumulants(sum_moments(p, a, 12).raw);
        const auto kb = raw_to_cumulants(sum_moments(p, b, 12).raw);
        const auto kab = raw_to_cumulants(sum_moments(p, a + b, 12).raw);
        for (std::size_t j = 0; j < kab.size(); ++j) {
            if (j == 0) continue;
            CHECK(kab[j] == ka[j] + kb[j]);
        }
    }
}

TEST_CASE("sum moments: properties over random (p, N)") {
    CounterRng rng(12, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        const Rational p = test::random_p(rng);
        const std::uint64_t n = 1 + rng.below(200);
        const auto t = sum_moments(p, n, 10);
        CAPTURE(to_string(p));
        CAPTURE(n);
        CHECK(t.raw[0] == 1);
        CHECK(t.raw[2] == p * static_cast<unsigned long>(n));
        for (int j = 1; j <= 9; j += 2) CHECK(t.raw[j] == 0);
        // monotone in N
        const auto next = sum_moments(p, n + 1, 10);
        for (int j = 2; j <= 10; j += 2) CHECK(next.raw[j] >= t.raw[j]);
        // monotone in p
        const Rational p2 = p + (q(1, 2) - p) * q(static_cast<long>(1 + rng.below(8)), 8);
        const auto bigger = sum_moments(p2, n, 10);
        for (int j = 2; j <= 10; j += 2) CHECK(bigger.raw[j] >= t.raw[j]);
    }
}

TEST_CASE("sum moments match literal enumeration") {
    for (const Rational& p : {q(1, 8), q(1, 4), q(1, 2), q(1, 3)}) {
        for (std::uint64_t count = 1; count <= 6; ++count) {
            const auto exact = sum_moments(p, count, 8).raw;
            const auto brute = enumerate_trinary_sum_moments(count, p, 8);
            CAPTURE(count);
            CHECK(exact == brute);
        }
    }
}

TEST_CASE("binomial difference moments") {
    // (n=3, p=1/2, j=4): E S^4 / (n-1)^2 with E S^4 = 5/2 over N = 2.
    CHECK(binom_diff_moments_exact(3, q(1, 2), 4)[4] == q(5, 8));
    CHECK(enumerate_binomial_difference_moment(3, q(1, 2), 4) == q(5, 8));
    CHECK(binom_diff_moment(3, q(1, 2), 4) == 0.625);

    CounterRng rng(13, 0);
    for (int c = 0; c < 100; ++c) {
        const Rational p = test::random_p(rng);
        const std::uint64_t n = 2 + rng.below(500);
        CHECK(binom_diff_moments_exact(n, p, 2)[2] == p);
        CHECK(binom_diff_moment(n, p, 3) == 0.0);
        CHECK(binom_diff_moment(n, p, 2) == to_double(p));
    }
    CHECK_THROWS_AS(binom_diff_moment(1, q(1, 2), 2), DomainError);
}

TEST_CASE("binomial difference matches the two-binomial representation") {
    // sigma = (1 - sqrt(1 - 2p))/2 is rational for these p
    for (const Rational& p : {q(1, 2), q(4, 9), q(3, 8), q(7, 32)}) {
        for (std::uint64_t n = 2; n <= 8; ++n) {
            const auto exact = binom_diff_moments_exact(n, p, 8);
            for (int j = 0; j <= 8; ++j) {
                CAPTURE(n);
                CAPTURE(j);
                CHECK(exact[j] == enumerate_binomial_difference_moment(n, p, j));
            }
        }
    }
    CHECK_THROWS_AS(enumerate_binomial_difference_moment(4, q(1, 4), 2), DomainError);
}

TEST_CASE("moment cache returns bit-identical values") {
    clear_moment_cache();
    CHECK(moment_cache_size() == 0);
    const Rational p = q(3, 100);
    const auto first = binom_diff_moment_table(1000, p, 20);
    CHECK(moment_cache_size() >= 1);
    const auto second = binom_diff_moment_table(1000, p, 20);
    CHECK(first == second);
    const auto exact = binom_diff_moments_exact(1000, p, 20);
    for (int j = 0; j <= 20; ++j) CHECK(first[j] == to_double(exact[j]));
    // a shorter request after a longer one sees the same prefix
    const auto shorter = binom_diff_moment_table(1000, p, 6);
    CHECK(std::equal(shorter.begin(), shorter.end(), first.begin()));
    clear_moment_cache();
    CHECK(binom_diff_moment_table(1000, p, 20) == first);
}
