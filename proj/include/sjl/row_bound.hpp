#pragma once

#include "sjl/rational.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sjl {

// Parameters shared by every bound: ambient dimension n, embedding dimension m,
// column sparsity s (so p = s/m) and dispersion v = |x|_inf / |x|_2.
struct BoundParams {
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t s = 0;
    double v = 1.0;

    Rational p() const;
    double p_value() const { return static_cast<double>(s) / static_cast<double>(m); }

    // Throws DomainError unless n >= 2, 1 <= s <= m, s/m <= 1/2 and 1/sqrt(n) <= v <= 1.
    void validate() const;
};

BoundParams make_params(std::uint64_t n, std::uint64_t m, std::uint64_t s, double v);

// Smallest admissible dispersion for dimension n, i.e. 1/sqrt(n).
double min_dispersion(std::uint64_t n);

// Throws DomainError when v is not the dispersion of some unit vector in dimension n.
void validate_dispersion(std::uint64_t n, double v);

// Bound on the d-th moment norm of a single row error E_r(x): 4 |sum_i x*_i Y_i|_d^2
// with x* the flattest unit vector of dispersion v.
double row_moment_bound(const BoundParams& params, int d);
double row_moment_bound(std::uint64_t n, const Rational& p, double v, int d);

// out[j] = row_moment_bound(..., j) for even j in [2, d_max]; out[0] = 1 and odd entries are 0.
// One moment table is shared by all orders.
std::vector<double> row_moment_bounds(std::uint64_t n, const Rational& p, double v, int d_max);

enum class BaselineVariant { D1, D2, Best };

inline constexpr double kBaselineC1 = 4.0 * 2.718281828459045235360287;  // 4e
inline constexpr double kBaselineC2 = 8.0;

// Prior-work row bounds evaluated with the smallest constants their proofs allow.
// D2 is undefined for p >= 1 (DomainError); Best then falls back to D1.
double baseline_row_bound(int d, double p, double v, BaselineVariant variant);

// Maximiser over real t in [1, d/2] of (d v / t) (p / (d v^2))^(1/(2t)).
double baseline_sup_argument(int d, double p, double v);

struct RatioRow {
    double d = 0;
    double p = 0;
    double v = 0;
    double t_new = 0;
    double t_old = 0;
    double ratio = 0;
    bool supported = true;  // false when p > 1/2 or v < 1/sqrt(n)
};

// Cells are emitted in (d, p, v) row-major order. Non-even d is linearly
// interpolated between the neighbouring even orders.
std::vector<RatioRow> ratio_grid(std::uint64_t n, std::span<const double> p_grid, std::span<const double> v_grid,
                                 std::span<const double> d_grid);

// Single-threaded reference for ratio_grid.
std::vector<RatioRow> ratio_grid_serial(std::uint64_t n, std::span<const double> p_grid,
                                        std::span<const double> v_grid, std::span<const double> d_grid);

}  // namespace sjl
