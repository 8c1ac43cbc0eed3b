#pragma once

// Ground truth for the bound modules: exact small-instance moments, the
// worst-case vector, majorization, and Monte-Carlo estimates of the error.
//
// Exact moments take squared weights u_i = x_i^2 as rationals. Every moment of
// sum_i x_i Y_i (and of the row error) only involves even powers of each x_i,
// so the result is an exact rational even when the x_i are irrational.

#include "sjl/rational.hpp"
#include "sjl/row_bound.hpp"
#include "sjl/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sjl {

inline constexpr std::size_t kMaxLinearEnumeration = 12;
inline constexpr std::size_t kMaxRowEnumeration = 10;

// x*_1 = v, x*_i = sqrt((1 - v^2) / (n - 1)) for i >= 2.
std::vector<double> worst_case_vector(std::uint64_t n, double v);

// Squared weights of the worst-case vector for a rational v^2.
std::vector<Rational> worst_case_weights(std::uint64_t n, const Rational& v_squared);

// True iff the descending prefix sums of u dominate those of w. Sums must agree within 1e-9.
bool majorizes(std::span<const double> u, std::span<const double> w);
bool majorizes(std::span<const Rational> u, std::span<const Rational> w);

// E[(sum_i x_i Y_i)^d] with Y_i i.i.d. trinary(p), summed over all 2^n supports
// with the Rademacher signs averaged in closed form.
Rational exact_linear_moment(std::span<const Rational> squared_weights, const Rational& p, int d);

// E[E_r(x)^d] with E_r(x) = sum_{i != j} eta_i eta_j x_i x_j, eta_i i.i.d. trinary(p).
Rational exact_row_moment(std::span<const Rational> squared_weights, const Rational& p, int d);

// Literal enumeration of all 3^n outcomes in floating point. Independent of the exact routes above.
double enumerate_linear_moment(std::span<const double> x, double p, int d);
double enumerate_row_moment(std::span<const double> x, double p, int d);

// E[S^j], S = Y_1 + ... + Y_count, by literal enumeration of all 3^count outcomes in exact arithmetic.
std::vector<Rational> enumerate_trinary_sum_moments(std::uint64_t count, const Rational& p, int d_max);

// E[(B' - B'')^j] from the two-binomial representation B', B'' ~ Binom(n - 1, sigma)/sqrt(n - 1),
// enumerating the (n)^2 support points. Requires sigma = (1 - sqrt(1 - 2p))/2 rational.
Rational enumerate_binomial_difference_moment(std::uint64_t n, const Rational& p, int j);

// Moment norm (E|X|^d)^(1/d) of an exact non-negative moment.
double moment_norm(const Rational& moment, int d);

// Random point of the simplex sum u_i = 1 with rational coordinates.
std::vector<Rational> random_simplex_point(std::size_t n, CounterRng& rng);

// Applies `transfers` reverse Robin-Hood moves (mass from a smaller coordinate to a
// larger one, never pushing a coordinate above `cap` and never touching indices in
// [0, frozen)). The result majorizes the input.
std::vector<Rational> concentrate(std::vector<Rational> u, int transfers, const Rational& cap, std::size_t frozen,
                                  CounterRng& rng);

// Unit squared-weight vectors with max coordinate exactly v^2 (coordinate 0), obtained
// by concentrating the worst-case weights. Each majorizes worst_case_weights(n, v^2).
std::vector<std::vector<Rational>> same_dispersion_weights(std::uint64_t n, const Rational& v_squared,
                                                           std::size_t count, std::uint64_t seed);

struct TailEstimate {
    std::uint64_t trials = 0;
    std::uint64_t exceed_count = 0;
    double point_estimate = 0;
    double wilson_99_low = 0;
    double wilson_99_high = 0;
};

TailEstimate wilson_interval(std::uint64_t exceed_count, std::uint64_t trials, double confidence = 0.99);

// Fraction of `trials` independent embeddings with |E(x)| > epsilon |x|^2.
// Deterministic given seed and independent of the thread count.
TailEstimate mc_error_tail(const BoundParams& params, std::span<const double> x, double epsilon,
                           std::uint64_t trials, std::uint64_t seed);
TailEstimate mc_error_tail(const BoundParams& params, double epsilon, std::uint64_t trials, std::uint64_t seed);
TailEstimate mc_error_tail_serial(const BoundParams& params, std::span<const double> x, double epsilon,
                                  std::uint64_t trials, std::uint64_t seed);

struct MomentEstimate {
    std::uint64_t trials = 0;
    double norm = 0;            // (mean |E|^d)^(1/d)
    double standard_error = 0;  // from 10 equal batches
};

inline constexpr int kMomentBatches = 10;

MomentEstimate mc_error_moment(const BoundParams& params, std::span<const double> x, int d, std::uint64_t trials,
                               std::uint64_t seed);
MomentEstimate mc_error_moment_serial(const BoundParams& params, std::span<const double> x, int d,
                                      std::uint64_t trials, std::uint64_t seed);

// Empirical check of negative dependence between row errors under column sampling
// without replacement: variance of the total versus the sum of per-row variances.
struct RowDependence {
    std::uint64_t trials = 0;
    double total_variance = 0;
    double sum_row_variances = 0;
    double total_variance_se = 0;
};

RowDependence mc_row_dependence(const BoundParams& params, std::span<const double> x, std::uint64_t trials,
                                std::uint64_t seed);

// Batch checks shared by the CLI and the acceptance suite.
struct CheckReport {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t violations = 0;
    double worst_margin = 0;  // most adverse (claimed - observed); negative means violated
    std::string first_violation;

    bool passed() const { return violations == 0 && cases > 0; }
};

struct ExactGrid {
    std::uint64_t n_max = 6;
    int d_max = 6;
    std::vector<Rational> p_values{Rational(1, 4), Rational(1, 2)};
    std::size_t vectors_per_case = 20;
    std::size_t majorization_pairs = 200;
    std::uint64_t seed = 1;
};

// sum_moments against literal enumeration, N = n - 1 for n in [2, n_max], even j <= d_max.
CheckReport check_moment_equivalence(std::uint64_t n_max, std::span<const Rational> p_values, int d_max);
// Exact |E_r(x)|_d <= T_{n,p,d}(v) + 1e-12 at x* and random same-v vectors.
CheckReport check_row_bound_soundness(const ExactGrid& grid);
// |sum_{i != j} Z_i Z_j|_d <= 4 |sum_i Z_i|_d^2 with Z_i = x_i eta_i, compared exactly.
CheckReport check_chaos_inequality(const ExactGrid& grid, std::size_t vectors);
// Majorizing squared weights give the smaller linear moment; x* is maximal among same-v vectors.
CheckReport check_majorization_ordering(const ExactGrid& grid);
CheckReport check_worst_case_attainment(const ExactGrid& grid);

}  // namespace sjl
