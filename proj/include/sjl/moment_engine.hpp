#pragma once

// Exact moments of sums of i.i.d. symmetric trinary variables.
//
// Y takes the values +1 and -1 with probability p/2 each and 0 otherwise. For
// S = Y_1 + ... + Y_N the raw moments are computed by converting the moments of
// Y into cumulants, scaling them by N and converting back, entirely in exact
// rational arithmetic. The difference B' - B'' of two i.i.d. scaled binomials
// Binom(n-1, sigma)/sqrt(n-1) with 2 sigma (1 - sigma) = p has the law of
// S/sqrt(n-1) with N = n - 1, which is how binom_diff_moment is evaluated.

#include "sjl/rational.hpp"

#include <cstdint>
#include <vector>

namespace sjl {

class TrinaryLaw {
public:
    // Throws DomainError unless 0 < p <= 1/2.
    explicit TrinaryLaw(Rational p);

    const Rational& p() const noexcept { return p_; }

    // E[Y^j] for j = 0..max_order.
    std::vector<Rational> raw_moments(int max_order) const;

    static void validate(const Rational& p);

private:
    Rational p_;
};

struct MomentTable {
    Rational p;
    std::uint64_t count = 0;
    std::vector<Rational> raw;  // raw[j] = E[S^j]

    int max_order() const noexcept { return static_cast<int>(raw.size()) - 1; }
};

// E[Y^j] for j = 0..d_max. d_max must be a positive even integer.
std::vector<Rational> trinary_moments(const Rational& p, int d_max);

// Standard recursions between raw moments and cumulants (mu[0] = 1).
std::vector<Rational> raw_to_cumulants(const std::vector<Rational>& raw);
std::vector<Rational> cumulants_to_raw(const std::vector<Rational>& cumulants);

MomentTable sum_moments(const Rational& p, std::uint64_t count, int d_max);

// Exact E[(B' - B'')^j] for j = 0..max_order (odd entries are zero).
std::vector<Rational> binom_diff_moments_exact(std::uint64_t n, const Rational& p, int max_order);

// E[(B' - B'')^j], rounded to nearest double. Served from a shared cache keyed by (p, n - 1).
double binom_diff_moment(std::uint64_t n, const Rational& p, int j);

// Rounded moments of B' - B'' for orders 0..max_order, cached per (p, n - 1).
// Cached and freshly computed values are bit-identical.
std::vector<double> binom_diff_moment_table(std::uint64_t n, const Rational& p, int max_order);

void clear_moment_cache();
std::size_t moment_cache_size();

}  // namespace sjl
