#include "sjl/oracle.hpp"

#include "sjl/embedding.hpp"
#include "sjl/errors.hpp"
#include "sjl/moment_engine.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace sjl {

namespace {

void require_even(int d) {
    if (d < 0 || d % 2 != 0) throw ArgumentError("moment order must be a non-negative even integer");
}

Rational factorial(unsigned k) {
    BigInt out;
    mpz_fac_ui(out.get_mpz_t(), k);
    return Rational(out);
}

Rational power(const Rational& base, unsigned e) {
    Rational out = 1;
    for (unsigned i = 0; i < e; ++i) out *= base;
    return out;
}

// Coefficients c[a] = u^a / (2a)! for a = 0..degree, the even part of cosh.
std::vector<Rational> cosh_series(const Rational& u, int degree) {
    std::vector<Rational> c(static_cast<std::size_t>(degree) + 1);
    Rational u_pow = 1;
    for (int a = 0; a <= degree; ++a) {
        c[a] = u_pow / factorial(2 * a);
        u_pow *= u;
    }
    return c;
}

std::vector<Rational> truncated_product(const std::vector<Rational>& a, const std::vector<Rational>& b) {
    std::vector<Rational> out(a.size(), Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) == 0) continue;
        for (std::size_t j = 0; i + j < out.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// Visits every support set T of {0..n-1} with its probability and the series
// prod_{i in T} cosh_series(u_i) truncated at `degree`, built incrementally.
template <class Visit>
void for_each_support(std::span<const Rational> u, const Rational& p, int degree, Visit&& visit) {
    const std::size_t n = u.size();
    const std::size_t masks = std::size_t{1} << n;
    std::vector<std::vector<Rational>> series(masks);
    std::vector<std::vector<Rational>> factors;
    factors.reserve(n);
    for (const auto& w : u) factors.push_back(cosh_series(w, degree));

    std::vector<Rational> prob_by_size(n + 1);
    const Rational q = 1 - p;
    for (std::size_t k = 0; k <= n; ++k) prob_by_size[k] = power(p, static_cast<unsigned>(k)) * power(q, static_cast<unsigned>(n - k));

    series[0].assign(static_cast<std::size_t>(degree) + 1, Rational(0));
    series[0][0] = 1;
    for (std::size_t mask = 0; mask < masks; ++mask) {
        if (mask != 0) {
            const auto low = static_cast<std::size_t>(std::countr_zero(mask));
            series[mask] = truncated_product(series[mask & (mask - 1)], factors[low]);
        }
        Rational mass = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) mass += u[i];
        }
        visit(mask, prob_by_size[static_cast<std::size_t>(std::popcount(mask))], series[mask], mass);
    }
}

void check_probability(const Rational& p) {
    if (sgn(p) < 0 || p > 1) throw DomainError("probability p must lie in [0, 1]");
}

}  // namespace

std::vector<double> worst_case_vector(std::uint64_t n, double v) {
    if (n == 0) throw ArgumentError("dimension must be positive");
    validate_dispersion(n, v);
    std::vector<double> x(n, 0.0);
    x[0] = std::min(v, 1.0);
    if (n > 1) {
        const double rest = std::sqrt(std::max(0.0, (1.0 - x[0]) * (1.0 + x[0])) / static_cast<double>(n - 1));
        std::fill(x.begin() + 1, x.end(), rest);
    }
    return x;
}

std::vector<Rational> worst_case_weights(std::uint64_t n, const Rational& v_squared) {
    if (n == 0) throw ArgumentError("dimension must be positive");
    if (v_squared > 1 || v_squared * static_cast<unsigned long>(n) < 1) {
        throw DomainError("v^2 must lie in [1/n, 1]");
    }
    std::vector<Rational> u(n, Rational(0));
    u[0] = v_squared;
    if (n > 1) {
        const Rational rest = (1 - v_squared) / Rational(make_bigint(n - 1));
        std::fill(u.begin() + 1, u.end(), rest);
    }
    return u;
}

namespace {

template <class T, class Sub, class Geq>
bool majorizes_impl(std::span<const T> u, std::span<const T> w, Sub&& sums_differ, Geq&& geq) {
    if (u.size() != w.size()) throw ArgumentError("majorization needs vectors of equal length");
    std::vector<T> a(u.begin(), u.end());
    std::vector<T> b(w.begin(), w.end());
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    T sa = 0, sb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sa += a[k];
        sb += b[k];
    }
    if (sums_differ(sa, sb)) throw ArgumentError("majorization needs vectors with equal sums");
    sa = 0;
    sb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sa += a[k];
        sb += b[k];
        if (!geq(sa, sb)) return false;
    }
    return true;
}

}  // namespace

bool majorizes(std::span<const double> u, std::span<const double> w) {
    return majorizes_impl<double>(
        u, w, [](double a, double b) { return std::abs(a - b) > 1e-9; },
        [](double a, double b) { return a >= b - 1e-12; });
}

bool majorizes(std::span<const Rational> u, std::span<const Rational> w) {
    return majorizes_impl<Rational>(
        u, w, [](const Rational& a, const Rational& b) { return a != b; },
        [](const Rational& a, const Rational& b) { return a >= b; });
}

namespace {

std::vector<Rational> exact_linear_moments(std::span<const Rational> u, const Rational& p, int d_max) {
    if (u.size() > kMaxLinearEnumeration) throw ResourceError("exact linear moment limited to n <= 12");
    require_even(d_max);
    check_probability(p);
    const int h = d_max / 2;
    std::vector<Rational> acc(static_cast<std::size_t>(h) + 1, Rational(0));
    for_each_support(u, p, h, [&](std::size_t, const Rational& prob, const std::vector<Rational>& series, const Rational&) {
        for (int a = 0; a <= h; ++a) acc[a] += prob * series[a];
    });
    std::vector<Rational> out(static_cast<std::size_t>(d_max) + 1, Rational(0));
    for (int a = 0; a <= h; ++a) out[2 * a] = acc[a] * factorial(2 * a);
    return out;
}

std::vector<Rational> exact_row_moments(std::span<const Rational> u, const Rational& p, int d_max) {
    if (u.size() > kMaxRowEnumeration) throw ResourceError("exact row moment limited to n <= 10");
    require_even(d_max);
    check_probability(p);
    std::vector<Rational> out(static_cast<std::size_t>(d_max) + 1, Rational(0));
    std::vector<Rational> sign_moments(static_cast<std::size_t>(d_max) + 1);
    for_each_support(u, p, d_max, [&](std::size_t, const Rational& prob, const std::vector<Rational>& series, const Rational& mass) {
        // Given the support, E_r = S^2 - mass with S a weighted Rademacher sum.
        for (int l = 0; l <= d_max; ++l) sign_moments[l] = series[l] * factorial(2 * l);
        for (int d = 0; d <= d_max; ++d) {
            Rational term = 0;
            Rational neg_mass_pow = 1;  // (-mass)^(d - l), built from l = d downwards
            for (int l = d; l >= 0; --l) {
                term += Rational(binomial(d, l)) * neg_mass_pow * sign_moments[l];
                neg_mass_pow *= -mass;
            }
            out[d] += prob * term;
        }
    });
    return out;
}

}  // namespace

Rational exact_linear_moment(std::span<const Rational> squared_weights, const Rational& p, int d) {
    require_even(d);
    if (d == 0) return 1;
    return exact_linear_moments(squared_weights, p, d)[d];
}

Rational exact_row_moment(std::span<const Rational> squared_weights, const Rational& p, int d) {
    require_even(d);
    if (d == 0) return 1;
    return exact_row_moments(squared_weights, p, d)[d];
}

namespace {

template <class Visit>
void for_each_trinary_outcome(std::size_t n, Visit&& visit) {
    std::vector<int> y(n, -1);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rem % 3) - 1;
            rem /= 3;
        }
        visit(y);
    }
}

constexpr std::size_t kMaxLiteralEnumeration = 14;

}  // namespace

double enumerate_linear_moment(std::span<const double> x, double p, int d) {
    if (x.size() > kMaxLiteralEnumeration) throw ResourceError("literal enumeration limited to n <= 14");
    double acc = 0.0;
    for_each_trinary_outcome(x.size(), [&](const std::vector<int>& y) {
        double prob = 1.0, sum = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            prob *= y[i] == 0 ? 1.0 - p : p / 2.0;
            sum += x[i] * y[i];
        }
        acc += prob * std::pow(sum, d);
    });
    return acc;
}

double enumerate_row_moment(std::span<const double> x, double p, int d) {
    if (x.size() > kMaxLiteralEnumeration) throw ResourceError("literal enumeration limited to n <= 14");
    double acc = 0.0;
    for_each_trinary_outcome(x.size(), [&](const std::vector<int>& y) {
        double prob = 1.0, sum = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            prob *= y[i] == 0 ? 1.0 - p : p / 2.0;
            sum += x[i] * y[i];
            if (y[i] != 0) diag += x[i] * x[i];
        }
        acc += prob * std::pow(sum * sum - diag, d);
    });
    return acc;
}

std::vector<Rational> enumerate_trinary_sum_moments(std::uint64_t count, const Rational& p, int d_max) {
    if (count > kMaxLiteralEnumeration) throw ResourceError("literal enumeration limited to 14 summands");
    if (d_max < 0) throw ArgumentError("negative moment order");
    check_probability(p);
    std::vector<Rational> prob_by_nonzero(count + 1);
    for (std::uint64_t k = 0; k <= count; ++k) {
        prob_by_nonzero[k] = power(p / 2, static_cast<unsigned>(k)) * power(1 - p, static_cast<unsigned>(count - k));
    }
    std::vector<Rational> out(static_cast<std::size_t>(d_max) + 1, Rational(0));
    for_each_trinary_outcome(count, [&](const std::vector<int>& y) {
        long sum = 0;
        std::size_t nonzero = 0;
        for (int yi : y) {
            sum += yi;
            nonzero += yi != 0;
        }
        Rational s_pow = 1;
        for (int j = 0; j <= d_max; ++j) {
            out[j] += prob_by_nonzero[nonzero] * s_pow;
            s_pow *= sum;
        }
    });
    return out;
}

Rational enumerate_binomial_difference_moment(std::uint64_t n, const Rational& p, int j) {
    if (n < 2) throw DomainError("binomial difference needs n >= 2");
    if (j < 0) throw ArgumentError("negative moment order");
    if (j % 2 != 0) return 0;
    const Rational disc = 1 - 2 * p;
    if (sgn(disc) < 0) throw DomainError("p must be <= 1/2");
    if (!mpz_perfect_square_p(disc.get_num_mpz_t()) || !mpz_perfect_square_p(disc.get_den_mpz_t())) {
        throw DomainError("sigma is irrational for this p; use a p with 1 - 2p a rational square");
    }
    BigInt num, den;
    mpz_sqrt(num.get_mpz_t(), disc.get_num_mpz_t());
    mpz_sqrt(den.get_mpz_t(), disc.get_den_mpz_t());
    const Rational sigma = (1 - Rational(num, den)) / 2;
    const auto trials = static_cast<unsigned>(n - 1);

    std::vector<Rational> pmf(trials + 1);
    for (unsigned a = 0; a <= trials; ++a) {
        pmf[a] = Rational(binomial(trials, a)) * power(sigma, a) * power(1 - sigma, trials - a);
    }
    Rational acc = 0;
    for (unsigned a = 0; a <= trials; ++a) {
        for (unsigned b = 0; b <= trials; ++b) {
            acc += pmf[a] * pmf[b] * power(Rational(static_cast<long>(a) - static_cast<long>(b)), static_cast<unsigned>(j));
        }
    }
    return acc / power(Rational(trials), static_cast<unsigned>(j / 2));
}

double moment_norm(const Rational& moment, int d) {
    if (d <= 0) throw ArgumentError("moment norm needs d >= 1");
    const double value = to_double(moment);
    return value <= 0.0 ? 0.0 : std::pow(value, 1.0 / d);
}

std::vector<Rational> random_simplex_point(std::size_t n, CounterRng& rng) {
    std::vector<Rational> u(n);
    unsigned long total = 0;
    std::vector<unsigned long> w(n);
    for (auto& wi : w) {
        wi = 1 + rng.below(1000);
        total += wi;
    }
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = Rational(w[i], total);
        u[i].canonicalize();
    }
    return u;
}

std::vector<Rational> concentrate(std::vector<Rational> u, int transfers, const Rational& cap, std::size_t frozen,
                                  CounterRng& rng) {
    const std::size_t n = u.size();
    if (n < frozen + 2) return u;
    const std::size_t span = n - frozen;
    for (int t = 0; t < transfers; ++t) {
        std::size_t i = frozen + rng.below(span);
        std::size_t j = frozen + rng.below(span - 1);
        if (j >= i) ++j;
        if (u[i] > u[j]) std::swap(i, j);  // i gives, j receives
        const Rational headroom = cap - u[j];
        const Rational room = std::min<Rational>(u[i], headroom);
        if (sgn(room) <= 0) continue;
        const Rational amount = room * make_rational(1 + rng.below(64), 64);
        u[i] -= amount;
        u[j] += amount;
    }
    return u;
}

std::vector<std::vector<Rational>> same_dispersion_weights(std::uint64_t n, const Rational& v_squared,
                                                           std::size_t count, std::uint64_t seed) {
    const auto base = worst_case_weights(n, v_squared);
    CounterRng rng(seed, n);
    std::vector<std::vector<Rational>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const int transfers = 1 + static_cast<int>(rng.below(3 * n));
        out.push_back(concentrate(base, transfers, v_squared, 1, rng));
    }
    return out;
}

TailEstimate wilson_interval(std::uint64_t exceed_count, std::uint64_t trials, double confidence) {
    if (trials == 0) throw ArgumentError("Wilson interval needs at least one trial");
    if (exceed_count > trials) throw ArgumentError("exceed count larger than trial count");
    const boost::math::normal standard;
    const double z = boost::math::quantile(standard, 0.5 + confidence / 2.0);
    const double t = static_cast<double>(trials);
    const double k = static_cast<double>(exceed_count);
    const double phat = k / t;
    const double denom = 1.0 + z * z / t;
    const double center = (phat + z * z / (2.0 * t)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / t + z * z / (4.0 * t * t)) / denom;
    return {trials, exceed_count, phat, std::max(0.0, std::min(phat, center - half)),
            std::min(1.0, std::max(phat, center + half))};
}

namespace {

void check_mc_inputs(const BoundParams& params, std::span<const double> x, std::uint64_t trials) {
    if (trials == 0) throw ArgumentError("Monte Carlo needs at least one trial");
    if (x.size() != params.n) throw ArgumentError("vector length does not match n");
    if (params.s == 0 || params.s > params.m) throw ArgumentError("sparsity s must satisfy 1 <= s <= m");
}

}  // namespace

TailEstimate mc_error_tail(const BoundParams& params, std::span<const double> x, double epsilon,
                           std::uint64_t trials, std::uint64_t seed) {
    check_mc_inputs(params, x, trials);
    std::uint64_t exceed = 0;
#pragma omp parallel reduction(+ : exceed)
    {
        std::vector<double> scratch(params.m);
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            const double e = streamed_distortion(params.m, params.s, derive_seed(seed, static_cast<std::uint64_t>(t)), x, scratch);
            if (std::abs(e) > epsilon) ++exceed;
        }
    }
    return wilson_interval(exceed, trials);
}

TailEstimate mc_error_tail(const BoundParams& params, double epsilon, std::uint64_t trials, std::uint64_t seed) {
    const auto x = worst_case_vector(params.n, params.v);
    return mc_error_tail(params, x, epsilon, trials, seed);
}

TailEstimate mc_error_tail_serial(const BoundParams& params, std::span<const double> x, double epsilon,
                                  std::uint64_t trials, std::uint64_t seed) {
    check_mc_inputs(params, x, trials);
    std::vector<double> scratch(params.m);
    std::uint64_t exceed = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        if (std::abs(streamed_distortion(params.m, params.s, derive_seed(seed, t), x, scratch)) > epsilon) ++exceed;
    }
    return wilson_interval(exceed, trials);
}

namespace {

MomentEstimate summarize_moments(const std::vector<double>& powered, int d) {
    const std::uint64_t trials = powered.size();
    MomentEstimate out{trials, 0.0, 0.0};
    const double total = std::accumulate(powered.begin(), powered.end(), 0.0);
    out.norm = std::pow(total / static_cast<double>(trials), 1.0 / d);
    if (trials < static_cast<std::uint64_t>(kMomentBatches)) return out;
    std::vector<double> batch_norms;
    const std::uint64_t per = trials / kMomentBatches;
    for (int b = 0; b < kMomentBatches; ++b) {
        const auto first = powered.begin() + static_cast<std::ptrdiff_t>(b * per);
        const double sum = std::accumulate(first, first + static_cast<std::ptrdiff_t>(per), 0.0);
        batch_norms.push_back(std::pow(sum / static_cast<double>(per), 1.0 / d));
    }
    const double mean = std::accumulate(batch_norms.begin(), batch_norms.end(), 0.0) / kMomentBatches;
    double var = 0.0;
    for (double b : batch_norms) var += (b - mean) * (b - mean);
    var /= kMomentBatches - 1;
    out.standard_error = std::sqrt(var / kMomentBatches);
    return out;
}

}  // namespace

MomentEstimate mc_error_moment(const BoundParams& params, std::span<const double> x, int d, std::uint64_t trials,
                               std::uint64_t seed) {
    check_mc_inputs(params, x, trials);
    if (d < 2 || d % 2 != 0) throw ArgumentError("moment order must be even and >= 2");
    std::vector<double> powered(trials);
#pragma omp parallel
    {
        std::vector<double> scratch(params.m);
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            const double e = streamed_distortion(params.m, params.s, derive_seed(seed, static_cast<std::uint64_t>(t)), x, scratch);
            powered[t] = std::pow(std::abs(e), d);
        }
    }
    return summarize_moments(powered, d);
}

MomentEstimate mc_error_moment_serial(const BoundParams& params, std::span<const double> x, int d,
                                      std::uint64_t trials, std::uint64_t seed) {
    check_mc_inputs(params, x, trials);
    if (d < 2 || d % 2 != 0) throw ArgumentError("moment order must be even and >= 2");
    std::vector<double> powered(trials);
    std::vector<double> scratch(params.m);
    for (std::uint64_t t = 0; t < trials; ++t) {
        powered[t] = std::pow(std::abs(streamed_distortion(params.m, params.s, derive_seed(seed, t), x, scratch)), d);
    }
    return summarize_moments(powered, d);
}

RowDependence mc_row_dependence(const BoundParams& params, std::span<const double> x, std::uint64_t trials,
                                std::uint64_t seed) {
    check_mc_inputs(params, x, trials);
    if (trials < 2) throw ArgumentError("variance estimates need at least two trials");
    const std::uint64_t m = params.m;
    std::vector<double> totals(trials);
    std::vector<double> row_sum(m, 0.0), row_sq(m, 0.0);
    std::vector<double> y(m), hit(m);
    std::vector<std::uint32_t> rows;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto emb = SparseEmbedding::sample(params.n, m, params.s, SamplingVariant::ColumnWithoutReplacement,
                                                 derive_seed(seed, t));
        std::fill(y.begin(), y.end(), 0.0);
        std::fill(hit.begin(), hit.end(), 0.0);
        for (std::uint64_t c = 0; c < params.n; ++c) {
            const auto r = emb.column_rows(c);
            const auto sg = emb.column_signs(c);
            for (std::size_t k = 0; k < r.size(); ++k) {
                y[r[k]] += sg[k] * x[c];
                hit[r[k]] += x[c] * x[c];
            }
        }
        double total = 0.0;
        for (std::uint64_t r = 0; r < m; ++r) {
            const double e = y[r] * y[r] - hit[r];  // E_r(x)
            total += e;
            row_sum[r] += e;
            row_sq[r] += e * e;
        }
        totals[t] = total;
    }
    const double tn = static_cast<double>(trials);
    const double mean = std::accumulate(totals.begin(), totals.end(), 0.0) / tn;
    double var = 0.0, fourth = 0.0;
    for (double v : totals) {
        var += (v - mean) * (v - mean);
        fourth += std::pow(v - mean, 4);
    }
    var /= tn - 1.0;
    fourth /= tn;
    double sum_row = 0.0;
    for (std::uint64_t r = 0; r < m; ++r) {
        const double mu = row_sum[r] / tn;
        sum_row += (row_sq[r] / tn - mu * mu) * tn / (tn - 1.0);
    }
    // Standard error of the sample variance: sqrt((mu4 - sigma^4) / trials).
    const double se = std::sqrt(std::max(0.0, fourth - var * var) / tn);
    return {trials, var, sum_row, se};
}

namespace {

std::vector<Rational> dispersion_grid(std::uint64_t n) {
    std::vector<Rational> grid{Rational(1, static_cast<unsigned long>(n))};
    for (int k = 1; k <= 4; ++k) {
        const Rational v2 = make_rational(static_cast<std::uint64_t>(k), 4);
        if (v2 * static_cast<unsigned long>(n) > 1) grid.push_back(v2);
    }
    return grid;
}

std::string describe(std::uint64_t n, const Rational& p, int d, const std::vector<Rational>& u) {
    std::ostringstream os;
    os << "n=" << n << " p=" << p << " d=" << d << " u=(";
    for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
    os << ")";
    return os.str();
}

void record(CheckReport& report, double margin, bool violated, const std::string& what) {
    if (report.cases == 0 || margin < report.worst_margin) report.worst_margin = margin;
    ++report.cases;
    if (violated) {
        if (report.violations == 0) report.first_violation = what;
        ++report.violations;
    }
}

}  // namespace

CheckReport check_moment_equivalence(std::uint64_t n_max, std::span<const Rational> p_values, int d_max) {
    CheckReport report;
    report.name = "moment_equivalence";
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        for (const auto& p : p_values) {
            const auto fast = sum_moments(p, n - 1, d_max);
            const auto brute = enumerate_trinary_sum_moments(n - 1, p, d_max);
            for (int j = 0; j <= d_max; ++j) {
                const bool equal = fast.raw[j] == brute[j];
                record(report, equal ? 0.0 : -1.0, !equal,
                       "n=" + std::to_string(n) + " p=" + to_string(p) + " j=" + std::to_string(j));
            }
        }
    }
    return report;
}

CheckReport check_row_bound_soundness(const ExactGrid& grid) {
    CheckReport report;
    report.name = "row_bound_soundness";
    for (std::uint64_t n = 2; n <= grid.n_max; ++n) {
        for (const auto& v2 : dispersion_grid(n)) {
            auto vectors = same_dispersion_weights(n, v2, grid.vectors_per_case, grid.seed);
            vectors.insert(vectors.begin(), worst_case_weights(n, v2));
            const double v = std::sqrt(to_double(v2));
            for (const auto& p : grid.p_values) {
                const auto bounds = row_moment_bounds(n, p, v, grid.d_max);
                for (const auto& u : vectors) {
                    const auto moments = exact_row_moments(u, p, grid.d_max);
                    for (int d = 2; d <= grid.d_max; d += 2) {
                        const double exact = moment_norm(moments[d], d);
                        const double margin = bounds[d] - exact;
                        record(report, margin, exact > bounds[d] + 1e-12, describe(n, p, d, u));
                    }
                }
            }
        }
    }
    return report;
}

CheckReport check_chaos_inequality(const ExactGrid& grid, std::size_t vectors) {
    CheckReport report;
    report.name = "chaos_inequality";
    CounterRng rng(grid.seed, 0xc4a05);
    for (std::uint64_t n = 2; n <= grid.n_max; ++n) {
        for (const auto& p : grid.p_values) {
            for (std::size_t k = 0; k < vectors; ++k) {
                const auto u = random_simplex_point(n, rng);
                const auto row = exact_row_moments(u, p, grid.d_max);
                const auto lin = exact_linear_moments(u, p, grid.d_max);
                for (int d = 2; d <= grid.d_max; d += 2) {
                    // |Q|_d <= 4 |S|_d^2  <=>  E Q^d <= 4^d (E S^d)^2
                    const Rational rhs = power(Rational(4), static_cast<unsigned>(d)) * lin[d] * lin[d];
                    const double margin = 4.0 * std::pow(moment_norm(lin[d], d), 2) - moment_norm(row[d], d);
                    record(report, margin, row[d] > rhs, describe(n, p, d, u));
                }
            }
        }
    }
    return report;
}

CheckReport check_majorization_ordering(const ExactGrid& grid) {
    CheckReport report;
    report.name = "majorization_ordering";
    CounterRng rng(grid.seed, 0x5c7u);
    for (std::uint64_t n = 2; n <= grid.n_max; ++n) {
        for (const auto& p : grid.p_values) {
            for (std::size_t k = 0; k < grid.majorization_pairs; ++k) {
                const auto flat = random_simplex_point(n, rng);
                const auto peaked = concentrate(flat, 1 + static_cast<int>(rng.below(2 * n)), Rational(1), 0, rng);
                if (!majorizes(std::span<const Rational>(peaked), std::span<const Rational>(flat))) {
                    record(report, -1.0, true, "generator produced a non-majorizing pair: " + describe(n, p, 0, peaked));
                    continue;
                }
                const auto big = exact_linear_moments(peaked, p, grid.d_max);
                const auto small = exact_linear_moments(flat, p, grid.d_max);
                for (int d = 2; d <= grid.d_max; d += 2) {
                    // (peaked^2) majorizes (flat^2) => |S(peaked)|_d <= |S(flat)|_d
                    const double margin = moment_norm(small[d], d) - moment_norm(big[d], d);
                    record(report, margin, big[d] > small[d], describe(n, p, d, peaked));
                }
            }
        }
    }
    return report;
}

CheckReport check_worst_case_attainment(const ExactGrid& grid) {
    CheckReport report;
    report.name = "worst_case_attainment";
    for (std::uint64_t n = 2; n <= grid.n_max; ++n) {
        for (const auto& v2 : dispersion_grid(n)) {
            const auto star = worst_case_weights(n, v2);
            const auto others = same_dispersion_weights(n, v2, grid.vectors_per_case, grid.seed + 7);
            for (const auto& p : grid.p_values) {
                const auto best = exact_linear_moments(star, p, grid.d_max);
                for (const auto& u : others) {
                    const auto mom = exact_linear_moments(u, p, grid.d_max);
                    for (int d = 2; d <= grid.d_max; d += 2) {
                        const double margin = moment_norm(best[d], d) - moment_norm(mom[d], d);
                        record(report, margin, mom[d] > best[d], describe(n, p, d, u));
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace sjl
