#include "sjl/embedding.hpp"

#include "sjl/errors.hpp"
#include "sjl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace sjl {

namespace {

constexpr std::uint64_t kMaxRows = std::numeric_limits<std::uint32_t>::max();

bool contains(const std::vector<std::uint32_t>& v, std::size_t from, std::uint32_t value) {
    return std::find(v.begin() + static_cast<std::ptrdiff_t>(from), v.end(), value) != v.end();
}

}  // namespace

std::string to_string(SamplingVariant variant) {
    switch (variant) {
        case SamplingVariant::ColumnWithoutReplacement:
            return "column-wor";
        case SamplingVariant::RowWithoutReplacement:
            return "row-wor";
        case SamplingVariant::WithReplacement:
            return "with-replacement";
    }
    return "unknown";
}

SamplingVariant parse_variant(const std::string& name) {
    if (name == "column-wor") return SamplingVariant::ColumnWithoutReplacement;
    if (name == "row-wor") return SamplingVariant::RowWithoutReplacement;
    if (name == "with-replacement") return SamplingVariant::WithReplacement;
    throw ArgumentError("unknown sampling variant '" + name + "' (expected column-wor, row-wor or with-replacement)");
}

void sample_distinct(std::uint64_t key, std::uint64_t stream, std::uint64_t universe, std::uint64_t count,
                     std::vector<std::uint32_t>& out) {
    CounterRng rng(key, stream);
    const std::size_t start = out.size();
    if (count <= 64) {
        for (std::uint64_t j = universe - count; j < universe; ++j) {
            const auto t = static_cast<std::uint32_t>(rng.below(j + 1));
            out.push_back(contains(out, start, t) ? static_cast<std::uint32_t>(j) : t);
        }
        return;
    }
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(count * 2);
    for (std::uint64_t j = universe - count; j < universe; ++j) {
        auto t = static_cast<std::uint32_t>(rng.below(j + 1));
        if (!seen.insert(t).second) {
            t = static_cast<std::uint32_t>(j);
            seen.insert(t);
        }
        out.push_back(t);
    }
}

namespace {

// Signs come from a stream disjoint from the one that chose the positions.
constexpr std::uint64_t kSignStream = 0x5157a11f0e5b3d27ULL;

void column_entries(SamplingVariant variant, std::uint64_t seed, std::uint64_t col, std::uint64_t m,
                    std::uint64_t s, std::vector<std::uint32_t>& rows, std::vector<std::int8_t>& signs) {
    rows.clear();
    signs.clear();
    if (variant == SamplingVariant::ColumnWithoutReplacement) {
        sample_distinct(seed, col, m, s, rows);
    } else {
        CounterRng rng(seed, col);
        for (std::uint64_t k = 0; k < s; ++k) rows.push_back(static_cast<std::uint32_t>(rng.below(m)));
    }
    CounterRng sign_rng(seed ^ kSignStream, col);
    for (std::uint64_t k = 0; k < s; ++k) signs.push_back(static_cast<std::int8_t>(sign_rng.sign()));
}

}  // namespace

SparseEmbedding SparseEmbedding::sample(std::uint64_t n, std::uint64_t m, std::uint64_t s, SamplingVariant variant,
                                        std::uint64_t seed) {
    if (n == 0 || m == 0) throw ArgumentError("embedding dimensions must be positive");
    if (m > kMaxRows || n > kMaxRows) throw ArgumentError("embedding dimensions exceed 32-bit indices");
    if (s == 0) throw ArgumentError("sparsity s must be >= 1");
    if (variant == SamplingVariant::RowWithoutReplacement) {
        if (s > n) throw ArgumentError("row variant requires 1 <= s <= n");
    } else if (s > m) {
        throw ArgumentError("column variants require 1 <= s <= m");
    }

    SparseEmbedding out;
    out.n_ = n;
    out.m_ = m;
    out.s_ = s;
    out.variant_ = variant;
    out.seed_ = seed;

    if (variant != SamplingVariant::RowWithoutReplacement) {
        out.scale_ = 1.0 / std::sqrt(static_cast<double>(s));
        out.offsets_.resize(n + 1);
        for (std::uint64_t c = 0; c <= n; ++c) out.offsets_[c] = c * s;
        out.rows_.resize(n * s);
        out.signs_.resize(n * s);
#pragma omp parallel
        {
            std::vector<std::uint32_t> rows;
            std::vector<std::int8_t> signs;
#pragma omp for schedule(static)
            for (std::int64_t c = 0; c < static_cast<std::int64_t>(n); ++c) {
                column_entries(variant, seed, static_cast<std::uint64_t>(c), m, s, rows, signs);
                std::copy(rows.begin(), rows.end(), out.rows_.begin() + c * static_cast<std::int64_t>(s));
                std::copy(signs.begin(), signs.end(), out.signs_.begin() + c * static_cast<std::int64_t>(s));
            }
        }
        return out;
    }

    // Row variant: each row picks s distinct columns; transpose into column lists.
    out.scale_ = std::sqrt(static_cast<double>(n) / (static_cast<double>(m) * static_cast<double>(s)));
    std::vector<std::uint32_t> cols;
    cols.reserve(m * s);
    std::vector<std::int8_t> row_signs;
    row_signs.reserve(m * s);
    for (std::uint64_t r = 0; r < m; ++r) {
        sample_distinct(seed, r, n, s, cols);
        CounterRng sign_rng(seed ^ kSignStream, r);
        for (std::uint64_t k = 0; k < s; ++k) row_signs.push_back(static_cast<std::int8_t>(sign_rng.sign()));
    }
    out.offsets_.assign(n + 1, 0);
    for (auto c : cols) ++out.offsets_[c + 1];
    std::partial_sum(out.offsets_.begin(), out.offsets_.end(), out.offsets_.begin());
    out.rows_.resize(cols.size());
    out.signs_.resize(cols.size());
    std::vector<std::uint64_t> cursor(out.offsets_.begin(), out.offsets_.end() - 1);
    for (std::size_t e = 0; e < cols.size(); ++e) {
        const auto slot = cursor[cols[e]]++;
        out.rows_[slot] = static_cast<std::uint32_t>(e / s);
        out.signs_[slot] = row_signs[e];
    }
    return out;
}

std::span<const std::uint32_t> SparseEmbedding::column_rows(std::uint64_t col) const {
    if (col >= n_) throw ArgumentError("column index out of range");
    return {rows_.data() + offsets_[col], rows_.data() + offsets_[col + 1]};
}

std::span<const std::int8_t> SparseEmbedding::column_signs(std::uint64_t col) const {
    if (col >= n_) throw ArgumentError("column index out of range");
    return {signs_.data() + offsets_[col], signs_.data() + offsets_[col + 1]};
}

namespace {

// Unscaled accumulation y += sum_col x[col] * signs(col) in column-then-entry order.
template <class Visit>
void accumulate_signed(const std::vector<std::uint64_t>& offsets, const std::vector<std::uint32_t>& rows,
                       const std::vector<std::int8_t>& signs, std::vector<double>& y, Visit&& visit) {
    visit([&](std::uint64_t col, double value) {
        for (auto e = offsets[col]; e < offsets[col + 1]; ++e) y[rows[e]] += signs[e] > 0 ? value : -value;
    });
}

double sum_squares(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

}  // namespace

std::vector<double> SparseEmbedding::apply(std::span<const double> x) const {
    if (x.size() != n_) throw ArgumentError("vector length " + std::to_string(x.size()) + " != n = " + std::to_string(n_));
    std::vector<double> y(m_, 0.0);
    accumulate_signed(offsets_, rows_, signs_, y, [&](auto&& add) {
        for (std::uint64_t c = 0; c < n_; ++c) {
            if (x[c] != 0.0) add(c, x[c]);
        }
    });
    for (auto& value : y) value *= scale_;
    return y;
}

std::vector<double> SparseEmbedding::apply(const SparseVector& x) const {
    if (x.dimension != n_) throw ArgumentError("vector dimension " + std::to_string(x.dimension) + " != n = " + std::to_string(n_));
    std::vector<double> y(m_, 0.0);
    accumulate_signed(offsets_, rows_, signs_, y, [&](auto&& add) {
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            if (x.values[k] != 0.0) add(x.indices[k], x.values[k]);
        }
    });
    for (auto& value : y) value *= scale_;
    return y;
}

namespace {

double relative_error(double embedded_unscaled, double unscaled_per_unit, double norm_sq) {
    if (norm_sq == 0.0) throw ArgumentError("distortion is undefined for the zero vector");
    return embedded_unscaled / (unscaled_per_unit * norm_sq) - 1.0;
}

}  // namespace

// Squared norms are formed from the unscaled +-1 accumulation and divided by
// 1/scale^2 at the end, so a 1-sparse input with unit entry maps to exactly 0.
double SparseEmbedding::distortion(std::span<const double> x) const {
    if (x.size() != n_) throw ArgumentError("vector length mismatch");
    std::vector<double> y(m_, 0.0);
    accumulate_signed(offsets_, rows_, signs_, y, [&](auto&& add) {
        for (std::uint64_t c = 0; c < n_; ++c) {
            if (x[c] != 0.0) add(c, x[c]);
        }
    });
    const double inv_scale_sq = variant_ == SamplingVariant::RowWithoutReplacement
                                    ? static_cast<double>(m_) * static_cast<double>(s_) / static_cast<double>(n_)
                                    : static_cast<double>(s_);
    return relative_error(sum_squares(y), inv_scale_sq, sum_squares(x));
}

double SparseEmbedding::distortion(const SparseVector& x) const {
    if (x.dimension != n_) throw ArgumentError("vector dimension mismatch");
    std::vector<double> y(m_, 0.0);
    accumulate_signed(offsets_, rows_, signs_, y, [&](auto&& add) {
        for (std::size_t k = 0; k < x.indices.size(); ++k) {
            if (x.values[k] != 0.0) add(x.indices[k], x.values[k]);
        }
    });
    const double inv_scale_sq = variant_ == SamplingVariant::RowWithoutReplacement
                                    ? static_cast<double>(m_) * static_cast<double>(s_) / static_cast<double>(n_)
                                    : static_cast<double>(s_);
    return relative_error(sum_squares(y), inv_scale_sq, sum_squares(x.values));
}

double streamed_distortion(std::uint64_t m, std::uint64_t s, std::uint64_t seed, std::span<const double> x,
                           std::span<double> scratch) {
    if (scratch.size() < m) throw ArgumentError("scratch buffer smaller than m");
    if (s == 0 || s > m) throw ArgumentError("column variants require 1 <= s <= m");
    auto y = scratch.first(m);
    std::fill(y.begin(), y.end(), 0.0);
    thread_local std::vector<std::uint32_t> rows;
    for (std::uint64_t c = 0; c < x.size(); ++c) {
        const double value = x[c];
        if (value == 0.0) continue;
        rows.clear();
        sample_distinct(seed, c, m, s, rows);
        CounterRng sign_rng(seed ^ kSignStream, c);
        for (std::uint64_t k = 0; k < s; ++k) y[rows[k]] += sign_rng.sign() > 0 ? value : -value;
    }
    return relative_error(sum_squares(y), static_cast<double>(s), sum_squares(x));
}

nlohmann::json SparseEmbedding::to_json() const {
    return {{"format", "sjl-embedding"}, {"version", 1}, {"n", n_}, {"m", m_}, {"s", s_},
            {"variant", to_string(variant_)}, {"seed", seed_}};
}

SparseEmbedding SparseEmbedding::from_json(const nlohmann::json& record) {
    if (record.value("format", "") != "sjl-embedding") throw ArgumentError("not an sjl-embedding record");
    if (record.value("version", 0) != 1) throw ArgumentError("unsupported embedding record version");
    return sample(record.at("n").get<std::uint64_t>(), record.at("m").get<std::uint64_t>(),
                  record.at("s").get<std::uint64_t>(), parse_variant(record.at("variant").get<std::string>()),
                  record.at("seed").get<std::uint64_t>());
}

}  // namespace sjl
