#include "sjl/rational.hpp"

#include "sjl/errors.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace sjl {

double to_double(const Rational& q) {
    mpfr_t tmp;
    mpfr_init2(tmp, 53);
    mpfr_set_q(tmp, q.get_mpq_t(), MPFR_RNDN);
    const double out = mpfr_get_d(tmp, MPFR_RNDN);
    mpfr_clear(tmp);
    return out;
}

BigInt make_bigint(std::uint64_t value) {
    BigInt out;
    mpz_import(out.get_mpz_t(), 1, -1, sizeof value, 0, 0, &value);
    return out;
}

Rational make_rational(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw ArgumentError("rational with zero denominator");
    Rational q(make_bigint(num), make_bigint(den));
    q.canonicalize();
    return q;
}

Rational exact_rational(double x) {
    if (!std::isfinite(x)) throw ArgumentError("non-finite value has no rational form");
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

BigInt binomial(unsigned n, unsigned k) {
    BigInt out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace sjl
