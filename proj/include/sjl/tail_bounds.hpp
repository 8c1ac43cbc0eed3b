#pragma once

// From row bounds to guarantees on the whole embedding error E(x) = |Ax|^2 - |x|^2.
//
// The m row errors are aggregated with the i.i.d.-sum moment inequality: the
// d-th moment norm of a sum of m i.i.d. symmetric variables Z is at most the
// least t with E(1 + Z/t)^d <= exp(d / 2m). Feeding row bounds T_2k in place of
// |Z|_2k gives Q_d, and |E(x)|_d <= Q_d / s. Markov's inequality turns that into
// Pr[|E(x)| > eps] <= (Q_d / (s eps))^d.

#include "sjl/row_bound.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sjl {

// Lower end of every bisection bracket.
inline constexpr double kBracketFloor = 1e-300;
inline constexpr double kSolverRelTol = 1e-12;
inline constexpr int kMaxBracketDoublings = 200;
inline constexpr int kDefaultMaxOrder = 64;

// Least t > 0 with sum_{even k <= d} C(d, k) E[Z^k] / t^k <= exp(d / 2m), an upper
// bound on |Z_1 + ... + Z_m|_d for i.i.d. symmetric Z. even_moments(k) must return
// E[Z^k]; odd orders are never queried.
double iid_sum_norm_bound(const std::function<double(int)>& even_moments, int d, std::uint64_t m);

// Same solver, with moment norms given directly: norms[k] = |Z|_k for even k <= d
// (norms[0] ignored). Avoids overflow of E[Z^k] at high order.
double iid_sum_norm_bound_from_norms(std::span<const double> norms, int d, std::uint64_t m);

// Left-hand side minus one: sum_{even 2 <= k <= d} C(d, k) (norms[k] / t)^k.
double moment_equation_excess(std::span<const double> norms, int d, double t);

enum class RowBoundKind { Sharp, Baseline };

struct AggregateBound {
    BoundParams params;
    int d = 0;
    double q = 0;             // Q_{n,p,d}(v)
    double error_moment = 0;  // Q / s, bound on |E(x)|_d
};

AggregateBound aggregate_bound(const BoundParams& params, int d);

// exp(d / 2m), the right-hand side of the aggregation equation.
double aggregation_threshold(int d, std::uint64_t m);

// Left-hand side of the aggregation equation at Q for the given params.
double aggregation_lhs(const BoundParams& params, int d, double q);

enum class EpsilonMode { Corollary, Optimized };

struct GuaranteeQuery {
    double epsilon = 0.0;
    double delta = 0.0;
    int d_max = kDefaultMaxOrder;
    EpsilonMode mode = EpsilonMode::Optimized;

    void validate() const;
};

// Q_d / s for every even d in [2, d_max], all sharing one table of row bounds.
class ErrorMomentBounds {
public:
    ErrorMomentBounds(const BoundParams& params, int d_max, RowBoundKind kind = RowBoundKind::Sharp);

    const BoundParams& params() const noexcept { return params_; }
    int max_order() const noexcept { return d_max_; }
    RowBoundKind kind() const noexcept { return kind_; }

    double row_bound(int d) const;  // T_d
    double q(int d) const;          // Q_d
    double error_moment(int d) const { return q(d) / static_cast<double>(params_.s); }

    // Proved bound on Pr[|E(x)| > epsilon], i.e. min(1, min_d (error_moment(d) / epsilon)^d).
    double failure_probability(double epsilon) const;

private:
    BoundParams params_;
    int d_max_;
    RowBoundKind kind_;
    std::vector<double> row_bounds_;
    std::vector<double> q_;
};

struct EpsilonResult {
    double epsilon = 0;
    double q = 0;
    int d = 0;
};

// Smallest even d with d >= ln(1/delta).
int corollary_order(double delta);

// Distortion guaranteed with probability >= 1 - delta.
// Corollary: eps = e Q_d / s at d = corollary_order(delta).
// Optimized: eps = min over even d <= d_max of (Q_d / s) delta^(-1/d).
EpsilonResult epsilon_bound(const BoundParams& params, double delta, EpsilonMode mode,
                            int d_max = kDefaultMaxOrder, RowBoundKind kind = RowBoundKind::Sharp);

// Proved failure probability delta-hat at distortion epsilon; confidence is 1 - delta-hat.
double failure_bound(const BoundParams& params, double epsilon, int d_max = kDefaultMaxOrder,
                     RowBoundKind kind = RowBoundKind::Sharp);

inline double confidence_at_epsilon(const BoundParams& params, double epsilon, int d_max = kDefaultMaxOrder,
                                    RowBoundKind kind = RowBoundKind::Sharp) {
    return 1.0 - failure_bound(params, epsilon, d_max, kind);
}

enum class SparsityRule { FixedCount, FixedRatio };

struct SparsityPolicy {
    SparsityRule rule = SparsityRule::FixedRatio;
    std::uint64_t count = 1;  // FixedCount
    double ratio = 0.1;       // FixedRatio, s = max(1, round(ratio m))

    std::uint64_t sparsity_for(std::uint64_t m) const;
    // Smallest m for which (m, sparsity_for(m)) satisfies 2 s <= m.
    std::uint64_t smallest_dimension() const;
    void validate() const;
};

struct DimensionQuery {
    std::uint64_t n = 0;
    SparsityPolicy sparsity;
    double epsilon = 0.0;
    double confidence = 0.75;
    double v = 1.0;
    int d_max = kDefaultMaxOrder;
    RowBoundKind kind = RowBoundKind::Sharp;
};

// Smallest m <= n reaching the target confidence at distortion epsilon, or nullopt if none does.
std::optional<std::uint64_t> min_dimension(const DimensionQuery& query);

struct SparsityQuery {
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    double epsilon = 0.0;
    double confidence = 0.75;
    double v = 1.0;
    int d_max = kDefaultMaxOrder;
    RowBoundKind kind = RowBoundKind::Sharp;
};

// Smallest s in [1, m/2] reaching the target, or m itself when none does.
std::uint64_t min_sparsity(const SparsityQuery& query);

// min_sparsity at each epsilon (query.epsilon ignored), sharing one bound table per s.
std::vector<std::uint64_t> min_sparsity_curve(const SparsityQuery& query, std::span<const double> epsilons);

// min_dimension with the failure budget 1 - confidence split evenly over pair_count vectors.
std::optional<std::uint64_t> union_bound_dimension(std::uint64_t pair_count, const DimensionQuery& query);

}  // namespace sjl
