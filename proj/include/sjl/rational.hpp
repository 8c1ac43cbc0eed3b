#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace sjl {

using Rational = mpq_class;
using BigInt = mpz_class;

// Correctly rounded (round-to-nearest-even) conversion to double.
// mpq_get_d truncates, so this goes through MPFR.
double to_double(const Rational& q);

BigInt make_bigint(std::uint64_t value);
Rational make_rational(std::uint64_t num, std::uint64_t den);

// Exact value of a finite double.
Rational exact_rational(double x);

// Binomial coefficient as an exact integer.
BigInt binomial(unsigned n, unsigned k);

std::string to_string(const Rational& q);

}  // namespace sjl
