#include "sjl/tail_bounds.hpp"

#include "sjl/detail/summation.hpp"
#include "sjl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sjl {

namespace {

constexpr double kE = 2.718281828459045235360287;

void require_even_order(int d) {
    if (d < 2 || d % 2 != 0) throw ArgumentError("moment order must be even and >= 2, got " + std::to_string(d));
}

double binom(int d, int k) {
    double out = 1.0;
    for (int j = 1; j <= k; ++j) out = out * static_cast<double>(d - k + j) / static_cast<double>(j);
    return out;
}

}  // namespace

double aggregation_threshold(int d, std::uint64_t m) {
    return std::exp(static_cast<double>(d) / (2.0 * static_cast<double>(m)));
}

double moment_equation_excess(std::span<const double> norms, int d, double t) {
    detail::CompensatedSum sum;
    for (int k = 2; k <= d; k += 2) {
        if (norms[k] == 0.0) continue;
        const double term = binom(d, k) * std::pow(norms[k] / t, k);
        if (std::isinf(term)) return term;
        sum.add(term);
    }
    return sum.value();
}

double iid_sum_norm_bound_from_norms(std::span<const double> norms, int d, std::uint64_t m) {
    require_even_order(d);
    if (m == 0) throw ArgumentError("number of summands must be positive");
    if (norms.size() < static_cast<std::size_t>(d) + 1) throw ArgumentError("moment table shorter than order");
    bool all_zero = true;
    for (int k = 2; k <= d; k += 2) {
        if (!std::isfinite(norms[k]) || norms[k] < 0.0) {
            throw SolverError("moment of order " + std::to_string(k) + " is not a finite non-negative number");
        }
        all_zero = all_zero && norms[k] == 0.0;
    }
    if (all_zero) return kBracketFloor;

    // Compare against expm1 so that exp(d/2m) - 1 keeps full precision for large m.
    const double target = std::expm1(static_cast<double>(d) / (2.0 * static_cast<double>(m)));
    auto too_small = [&](double t) { return moment_equation_excess(norms, d, t) > target; };

    double lo = kBracketFloor;
    double hi = 1.0;
    if (too_small(hi)) {
        int doublings = 0;
        while (too_small(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > kMaxBracketDoublings) {
                throw SolverError("could not bracket the moment equation root; the moment table is inconsistent");
            }
        }
    } else if (!too_small(lo)) {
        return lo;
    }

    while (hi - lo > kSolverRelTol * hi) {
        const double mid = hi > 4.0 * lo ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (too_small(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double iid_sum_norm_bound(const std::function<double(int)>& even_moments, int d, std::uint64_t m) {
    require_even_order(d);
    std::vector<double> norms(static_cast<std::size_t>(d) + 1, 0.0);
    norms[0] = 1.0;
    for (int k = 2; k <= d; k += 2) {
        const double moment = even_moments(k);
        if (!std::isfinite(moment) || moment < 0.0) {
            throw SolverError("moment of order " + std::to_string(k) + " is not a finite non-negative number");
        }
        norms[k] = std::pow(moment, 1.0 / k);
    }
    return iid_sum_norm_bound_from_norms(norms, d, m);
}

ErrorMomentBounds::ErrorMomentBounds(const BoundParams& params, int d_max, RowBoundKind kind)
    : params_(params), d_max_(d_max), kind_(kind) {
    require_even_order(d_max);
    params_.validate();
    if (kind == RowBoundKind::Sharp) {
        row_bounds_ = row_moment_bounds(params_.n, params_.p(), params_.v, d_max);
    } else {
        row_bounds_.assign(static_cast<std::size_t>(d_max) + 1, 0.0);
        row_bounds_[0] = 1.0;
        for (int d = 2; d <= d_max; d += 2) {
            row_bounds_[d] = baseline_row_bound(d, params_.p_value(), params_.v, BaselineVariant::Best);
        }
    }
    q_.assign(row_bounds_.size(), 0.0);
    for (int d = 2; d <= d_max; d += 2) q_[d] = iid_sum_norm_bound_from_norms(row_bounds_, d, params_.m);
}

double ErrorMomentBounds::row_bound(int d) const {
    require_even_order(d);
    if (d > d_max_) throw ArgumentError("order exceeds the precomputed range");
    return row_bounds_[d];
}

double ErrorMomentBounds::q(int d) const {
    require_even_order(d);
    if (d > d_max_) throw ArgumentError("order exceeds the precomputed range");
    return q_[d];
}

double ErrorMomentBounds::failure_probability(double epsilon) const {
    if (!(epsilon > 0.0)) throw ArgumentError("distortion epsilon must be positive");
    double best_log = 0.0;  // log 1
    for (int d = 2; d <= d_max_; d += 2) {
        const double log_tail = d * (std::log(error_moment(d)) - std::log(epsilon));
        best_log = std::min(best_log, log_tail);
    }
    return std::exp(best_log);
}

AggregateBound aggregate_bound(const BoundParams& params, int d) {
    const ErrorMomentBounds bounds(params, d);
    return AggregateBound{params, d, bounds.q(d), bounds.error_moment(d)};
}

double aggregation_lhs(const BoundParams& params, int d, double q) {
    const auto norms = row_moment_bounds(params.n, params.p(), params.v, d);
    return 1.0 + moment_equation_excess(norms, d, q);
}

void GuaranteeQuery::validate() const {
    if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
    if (d_max < 2 || d_max % 2 != 0) throw ArgumentError("d_max must be even and >= 2");
}

int corollary_order(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
    // The slack absorbs rounding in log(exp(-k)) so that delta = e^-2 maps to d = 2.
    const double raw = std::ceil(std::log(1.0 / delta) - 1e-9);
    const int d = static_cast<int>(std::max(raw, 1.0));
    return d % 2 == 0 ? d : d + 1;
}

EpsilonResult epsilon_bound(const BoundParams& params, double delta, EpsilonMode mode, int d_max,
                            RowBoundKind kind) {
    const int d_corollary = corollary_order(delta);
    if (mode == EpsilonMode::Corollary) {
        const ErrorMomentBounds bounds(params, d_corollary, kind);
        const double q = bounds.q(d_corollary);
        return {kE * q / static_cast<double>(params.s), q, d_corollary};
    }
    require_even_order(d_max);
    const ErrorMomentBounds bounds(params, d_max, kind);
    const double log_inv_delta = std::log(1.0 / delta);
    EpsilonResult best{std::numeric_limits<double>::infinity(), 0.0, 0};
    for (int d = 2; d <= d_max; d += 2) {
        const double eps = bounds.error_moment(d) * std::exp(log_inv_delta / d);
        if (eps < best.epsilon) best = {eps, bounds.q(d), d};
    }
    return best;
}

double failure_bound(const BoundParams& params, double epsilon, int d_max, RowBoundKind kind) {
    return ErrorMomentBounds(params, d_max, kind).failure_probability(epsilon);
}

std::uint64_t SparsityPolicy::sparsity_for(std::uint64_t m) const {
    if (rule == SparsityRule::FixedCount) return count;
    const auto half = std::max<std::uint64_t>(1, m / 2);
    const auto target = static_cast<std::uint64_t>(std::llround(ratio * static_cast<double>(m)));
    return std::clamp<std::uint64_t>(target, 1, half);
}

std::uint64_t SparsityPolicy::smallest_dimension() const {
    return rule == SparsityRule::FixedCount ? 2 * count : 2;
}

void SparsityPolicy::validate() const {
    if (rule == SparsityRule::FixedCount && count == 0) throw ArgumentError("fixed sparsity must be >= 1");
    if (rule == SparsityRule::FixedRatio && !(ratio > 0.0 && ratio <= 0.5)) {
        throw DomainError("sparsity ratio s/m must lie in (0, 1/2]");
    }
}

namespace {

bool meets_target(const DimensionQuery& q, std::uint64_t m) {
    const BoundParams params{q.n, m, q.sparsity.sparsity_for(m), q.v};
    return 1.0 - failure_bound(params, q.epsilon, q.d_max, q.kind) >= q.confidence;
}

constexpr std::uint64_t kVerifyWindow = 16;

}  // namespace

std::optional<std::uint64_t> min_dimension(const DimensionQuery& query) {
    query.sparsity.validate();
    if (!(query.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    if (!(query.confidence >= 0.0 && query.confidence < 1.0)) throw ArgumentError("confidence must lie in [0, 1)");
    validate_dispersion(query.n, query.v);

    const std::uint64_t m0 = query.sparsity.smallest_dimension();
    if (m0 > query.n) return std::nullopt;
    if (query.confidence <= 0.0) return m0;

    // Doubling: find a feasible m with the previous probe infeasible.
    std::uint64_t below = m0 - 1;  // largest m known infeasible (or below the legal range)
    std::uint64_t m = m0;
    while (!meets_target(query, m)) {
        if (m == query.n) return std::nullopt;
        below = m;
        m = std::min(query.n, 2 * m);
    }

    std::uint64_t lo = below;
    std::uint64_t hi = m;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (meets_target(query, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // The proved confidence need not be monotone in m; check a window below the answer.
    const std::uint64_t floor_m = std::max(m0, hi > kVerifyWindow ? hi - kVerifyWindow : m0);
    std::uint64_t best = hi;
    for (std::uint64_t cand = hi; cand-- > floor_m;) {
        if (meets_target(query, cand)) best = cand;
    }
    return best;
}

std::uint64_t min_sparsity(const SparsityQuery& query) {
    if (!(query.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    if (!(query.confidence >= 0.0 && query.confidence < 1.0)) throw ArgumentError("confidence must lie in [0, 1)");
    if (query.m < 2) return query.m;
    for (std::uint64_t s = 1; 2 * s <= query.m; ++s) {
        const BoundParams params{query.n, query.m, s, query.v};
        if (1.0 - failure_bound(params, query.epsilon, query.d_max, query.kind) >= query.confidence) return s;
    }
    return query.m;
}

std::vector<std::uint64_t> min_sparsity_curve(const SparsityQuery& query, std::span<const double> epsilons) {
    if (!(query.confidence >= 0.0 && query.confidence < 1.0)) throw ArgumentError("confidence must lie in [0, 1)");
    for (double eps : epsilons) {
        if (!(eps > 0.0)) throw ArgumentError("epsilon must be positive");
    }
    std::vector<std::uint64_t> result(epsilons.size(), query.m);
    std::size_t open = epsilons.size();
    std::vector<bool> done(epsilons.size(), false);
    for (std::uint64_t s = 1; 2 * s <= query.m && open > 0; ++s) {
        const ErrorMomentBounds bounds(BoundParams{query.n, query.m, s, query.v}, query.d_max, query.kind);
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            if (done[i]) continue;
            if (1.0 - bounds.failure_probability(epsilons[i]) >= query.confidence) {
                result[i] = s;
                done[i] = true;
                --open;
            }
        }
    }
    return result;
}

std::optional<std::uint64_t> union_bound_dimension(std::uint64_t pair_count, const DimensionQuery& query) {
    if (pair_count == 0) throw ArgumentError("pair_count must be >= 1");
    DimensionQuery per_pair = query;
    per_pair.confidence = 1.0 - (1.0 - query.confidence) / static_cast<double>(pair_count);
    return min_dimension(per_pair);
}

}  // namespace sjl
