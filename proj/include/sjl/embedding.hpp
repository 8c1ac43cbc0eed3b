#pragma once

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sjl {

enum class SamplingVariant {
    ColumnWithoutReplacement,  // s distinct rows per column
    RowWithoutReplacement,     // s distinct columns per row
    WithReplacement,           // s independent row draws per column, duplicates accumulate
};

std::string to_string(SamplingVariant variant);
SamplingVariant parse_variant(const std::string& name);

struct SparseVector {
    std::size_t dimension = 0;
    std::vector<std::uint32_t> indices;  // strictly increasing
    std::vector<double> values;
};

// Random m x n sign matrix with column sparsity s, stored column-compressed.
// Entries are regenerated from (seed, column) (or (seed, row) for the row
// variant), so a record holding only the header reproduces the matrix.
class SparseEmbedding {
public:
    static SparseEmbedding sample(std::uint64_t n, std::uint64_t m, std::uint64_t s,
                                  SamplingVariant variant = SamplingVariant::ColumnWithoutReplacement,
                                  std::uint64_t seed = 0);

    std::uint64_t n() const noexcept { return n_; }
    std::uint64_t m() const noexcept { return m_; }
    std::uint64_t s() const noexcept { return s_; }
    SamplingVariant variant() const noexcept { return variant_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Magnitude of every stored entry: 1/sqrt(s), or sqrt(n / (m s)) for the row
    // variant, whose columns hold s m / n entries on average.
    double scale() const noexcept { return scale_; }

    std::span<const std::uint32_t> column_rows(std::uint64_t col) const;
    std::span<const std::int8_t> column_signs(std::uint64_t col) const;
    std::size_t nonzeros() const noexcept { return rows_.size(); }

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> apply(const SparseVector& x) const;

    // |Ax|^2 / |x|^2 - 1.
    double distortion(std::span<const double> x) const;
    double distortion(const SparseVector& x) const;

    nlohmann::json to_json() const;
    static SparseEmbedding from_json(const nlohmann::json& record);

    bool operator==(const SparseEmbedding&) const = default;

private:
    std::uint64_t n_ = 0, m_ = 0, s_ = 0;
    SamplingVariant variant_ = SamplingVariant::ColumnWithoutReplacement;
    std::uint64_t seed_ = 0;
    double scale_ = 1.0;
    std::vector<std::uint64_t> offsets_;  // n + 1 column offsets
    std::vector<std::uint32_t> rows_;
    std::vector<std::int8_t> signs_;
};

// Floyd's algorithm: appends `count` distinct values from [0, universe) to `out`.
// Output is a pure function of (key, stream).
void sample_distinct(std::uint64_t key, std::uint64_t stream, std::uint64_t universe, std::uint64_t count,
                     std::vector<std::uint32_t>& out);

// Distortion |Ax|^2/|x|^2 - 1 of a column-without-replacement embedding drawn from
// `seed`, computed column by column without storing the matrix. Bit-identical to
// SparseEmbedding::sample(n, m, s, ColumnWithoutReplacement, seed).distortion(x).
// `scratch` must have room for m doubles.
double streamed_distortion(std::uint64_t m, std::uint64_t s, std::uint64_t seed, std::span<const double> x,
                           std::span<double> scratch);

}  // namespace sjl
