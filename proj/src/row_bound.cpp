#include "sjl/row_bound.hpp"

#include "sjl/detail/summation.hpp"
#include "sjl/errors.hpp"
#include "sjl/moment_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sjl {

namespace {

void require_even_order(int d) {
    if (d < 2 || d % 2 != 0) throw ArgumentError("moment order must be even and >= 2, got " + std::to_string(d));
}

// C(d, j) for j = 0..d in double; exact up to d = 1020 or so, we never go past a few hundred.
std::vector<double> binomial_row(int d) {
    std::vector<double> row(static_cast<std::size_t>(d) + 1, 1.0);
    for (int j = 1; j < d; ++j) row[j] = row[j - 1] * static_cast<double>(d - j + 1) / static_cast<double>(j);
    return row;
}

}  // namespace

Rational BoundParams::p() const { return make_rational(s, m); }

double min_dispersion(std::uint64_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

void validate_dispersion(std::uint64_t n, double v) {
    if (!(v <= 1.0) || !(v >= min_dispersion(n) * (1.0 - 1e-12))) {
        throw DomainError("dispersion v must lie in [1/sqrt(n), 1] = [" + std::to_string(min_dispersion(n)) +
                          ", 1], got " + std::to_string(v));
    }
}

void BoundParams::validate() const {
    if (n < 2) throw DomainError("ambient dimension n must be >= 2");
    if (m == 0) throw DomainError("embedding dimension m must be positive");
    if (s == 0 || s > m) throw DomainError("sparsity s must satisfy 1 <= s <= m");
    if (2 * s > m) {
        throw DomainError("p = s/m = " + std::to_string(p_value()) +
                          " exceeds 1/2; the trinary representation of the row law does not exist");
    }
    validate_dispersion(n, v);
}

BoundParams make_params(std::uint64_t n, std::uint64_t m, std::uint64_t s, double v) {
    BoundParams out{n, m, s, v};
    out.validate();
    return out;
}

std::vector<double> row_moment_bounds(std::uint64_t n, const Rational& p, double v, int d_max) {
    require_even_order(d_max);
    TrinaryLaw::validate(p);
    validate_dispersion(n, v);
    v = std::min(v, 1.0);

    const auto diff_moments = binom_diff_moment_table(n, p, d_max);
    const double p_value = to_double(p);
    const double rest = (1.0 - v) * (1.0 + v);  // 1 - v^2

    std::vector<double> v_pow(static_cast<std::size_t>(d_max / 2) + 1, 1.0);
    std::vector<double> rest_pow(v_pow.size(), 1.0);
    for (std::size_t k = 1; k < v_pow.size(); ++k) {
        v_pow[k] = v_pow[k - 1] * v * v;
        rest_pow[k] = rest_pow[k - 1] * rest;
    }

    std::vector<double> out(static_cast<std::size_t>(d_max) + 1, 0.0);
    out[0] = 1.0;
    for (int d = 2; d <= d_max; d += 2) {
        const auto binom = binomial_row(d);
        detail::CompensatedSum sum;
        for (int k = 0; k <= d / 2; ++k) {
            const double weight = k > 0 ? p_value : 1.0;
            sum.add(binom[2 * k] * weight * v_pow[k] * rest_pow[d / 2 - k] * diff_moments[d - 2 * k]);
        }
        out[d] = 4.0 * std::pow(sum.value(), 2.0 / d);
    }
    return out;
}

double row_moment_bound(std::uint64_t n, const Rational& p, double v, int d) {
    return row_moment_bounds(n, p, v, d)[static_cast<std::size_t>(d)];
}

double row_moment_bound(const BoundParams& params, int d) {
    params.validate();
    return row_moment_bound(params.n, params.p(), params.v, d);
}

double baseline_sup_argument(int d, double p, double v) {
    const double dd = d;
    const double log_ratio = std::log(p / (dd * v * v));
    auto objective = [&](double t) { return std::log(dd * v) - std::log(t) + log_ratio / (2.0 * t); };

    const double hi = dd / 2.0;
    double best_t = 1.0;
    double best = objective(1.0);
    auto consider = [&](double t) {
        const double value = objective(t);
        if (value > best) {
            best = value;
            best_t = t;
        }
    };
    consider(hi);
    if (p < dd * v * v) consider(std::clamp(-log_ratio / 2.0, 1.0, hi));
    return best_t;
}

double baseline_row_bound(int d, double p, double v, BaselineVariant variant) {
    require_even_order(d);
    if (!(p > 0.0) || !(p <= 1.0)) throw DomainError("baseline bound requires 0 < p <= 1");
    if (!(v > 0.0) || !(v <= 1.0)) throw DomainError("baseline bound requires 0 < v <= 1");

    auto d1 = [&] {
        const double dd = d;
        const double t = baseline_sup_argument(d, p, v);
        const double log_value = std::log(dd * v) - std::log(t) + std::log(p / (dd * v * v)) / (2.0 * t);
        return 2.0 * kBaselineC1 * std::exp(2.0 * log_value);
    };
    auto d2 = [&] {
        if (p >= 1.0) throw DomainError("baseline bound D2 needs p < 1 (log(1/p) must be positive)");
        return 2.0 * kBaselineC2 * d / std::log(1.0 / p);
    };

    switch (variant) {
        case BaselineVariant::D1:
            return d1();
        case BaselineVariant::D2:
            return d2();
        case BaselineVariant::Best:
            return p >= 1.0 ? d1() : std::min(d1(), d2());
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct CellInputs {
    std::uint64_t n;
    double p;
    double v;
};

bool cell_supported(const CellInputs& c) {
    return c.n >= 2 && c.p > 0.0 && c.p <= 0.5 && c.v <= 1.0 && c.v >= min_dispersion(c.n) * (1.0 - 1e-12);
}

void validate_grid(std::span<const double> p_grid, std::span<const double> v_grid) {
    for (double p : p_grid) {
        if (!(p > 0.0) || !(p <= 1.0)) throw DomainError("ratio grid p values must lie in (0, 1]");
    }
    for (double v : v_grid) {
        if (!(v > 0.0) || !(v <= 1.0)) throw DomainError("ratio grid v values must lie in (0, 1]");
    }
}

int max_even_order(std::span<const double> d_grid) {
    int top = 2;
    for (double d : d_grid) {
        if (!(d >= 2.0)) throw ArgumentError("ratio grid orders must be >= 2");
        top = std::max(top, static_cast<int>(std::ceil(d / 2.0)) * 2);
    }
    return top;
}

// Fills the rows of one (p, v) column for every requested d.
void fill_cell(const CellInputs& c, std::span<const double> d_grid, int top, std::size_t p_index,
               std::size_t v_index, std::size_t p_count, std::size_t v_count, std::vector<RatioRow>& rows) {
    const bool supported = cell_supported(c);
    std::vector<double> t_new;
    if (supported) t_new = row_moment_bounds(c.n, exact_rational(c.p), c.v, top);

    auto at_even = [&](int d, double& tn, double& to, double& ratio) {
        to = baseline_row_bound(d, c.p, c.v, BaselineVariant::Best);
        tn = supported ? t_new[d] : std::numeric_limits<double>::quiet_NaN();
        ratio = tn / to;
    };

    for (std::size_t di = 0; di < d_grid.size(); ++di) {
        const double d = d_grid[di];
        RatioRow row{d, c.p, c.v, 0, 0, 0, supported};
        const int lo = static_cast<int>(std::floor(d / 2.0)) * 2;
        if (static_cast<double>(lo) == d) {
            at_even(lo, row.t_new, row.t_old, row.ratio);
        } else {
            double a_new, a_old, a_ratio, b_new, b_old, b_ratio;
            at_even(lo, a_new, a_old, a_ratio);
            at_even(lo + 2, b_new, b_old, b_ratio);
            const double w = (d - lo) / 2.0;
            row.t_new = (1 - w) * a_new + w * b_new;
            row.t_old = (1 - w) * a_old + w * b_old;
            row.ratio = (1 - w) * a_ratio + w * b_ratio;
        }
        rows[(di * p_count + p_index) * v_count + v_index] = row;
    }
}

}  // namespace

std::vector<RatioRow> ratio_grid(std::uint64_t n, std::span<const double> p_grid, std::span<const double> v_grid,
                                 std::span<const double> d_grid) {
    if (p_grid.empty() || v_grid.empty() || d_grid.empty()) return {};
    validate_grid(p_grid, v_grid);
    const int top = max_even_order(d_grid);
    std::vector<RatioRow> rows(d_grid.size() * p_grid.size() * v_grid.size());
    const auto cells = static_cast<std::int64_t>(p_grid.size() * v_grid.size());

    // Warm the moment cache once per p so threads do not race to build the same table.
    for (double p : p_grid) {
        if (p > 0.0 && p <= 0.5 && n >= 2) binom_diff_moment_table(n, exact_rational(p), top);
    }

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t idx = 0; idx < cells; ++idx) {
        const auto pi = static_cast<std::size_t>(idx) / v_grid.size();
        const auto vi = static_cast<std::size_t>(idx) % v_grid.size();
        fill_cell({n, p_grid[pi], v_grid[vi]}, d_grid, top, pi, vi, p_grid.size(), v_grid.size(), rows);
    }
    return rows;
}

std::vector<RatioRow> ratio_grid_serial(std::uint64_t n, std::span<const double> p_grid,
                                        std::span<const double> v_grid, std::span<const double> d_grid) {
    if (p_grid.empty() || v_grid.empty() || d_grid.empty()) return {};
    validate_grid(p_grid, v_grid);
    const int top = max_even_order(d_grid);
    std::vector<RatioRow> rows(d_grid.size() * p_grid.size() * v_grid.size());
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
        for (std::size_t vi = 0; vi < v_grid.size(); ++vi) {
            fill_cell({n, p_grid[pi], v_grid[vi]}, d_grid, top, pi, vi, p_grid.size(), v_grid.size(), rows);
        }
    }
    return rows;
}

}  // namespace sjl
