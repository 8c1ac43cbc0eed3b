#pragma once

// Hand-rolled generators for the property tests. Every generator is a pure
// function of its CounterRng, so failures reproduce from the printed seed.

#include "sjl/rational.hpp"
#include "sjl/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace sjl::test {

inline constexpr int kPropertyCases = 200;

// p = a/b with b <= 64 and 0 < p <= 1/2.
inline Rational random_p(CounterRng& rng) {
    const std::uint64_t den = 2 + rng.below(63);
    const std::uint64_t num = 1 + rng.below(den / 2);
    return make_rational(num, den);
}

// Unit vector with entries of both signs and exact dispersion v = |x|_inf.
inline std::vector<double> random_unit_vector(std::size_t n, CounterRng& rng) {
    std::vector<double> x(n);
    double norm = 0;
    for (auto& xi : x) {
        xi = (rng.uniform() - 0.5) * (rng.below(4) == 0 ? 10.0 : 1.0);
        norm += xi * xi;
    }
    norm = std::sqrt(norm);
    if (norm == 0) {
        x[0] = 1;
        return x;
    }
    for (auto& xi : x) xi /= norm;
    return x;
}

inline double linf(const std::vector<double>& x) {
    double m = 0;
    for (double xi : x) m = std::max(m, std::abs(xi));
    return m;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// v uniform on [1/sqrt(n), 1].
inline double random_dispersion(std::uint64_t n, CounterRng& rng) {
    const double lo = 1.0 / std::sqrt(static_cast<double>(n));
    return lo + (1.0 - lo) * rng.uniform();
}

}  // namespace sjl::test
