#include "sjl/data_io.hpp"

#include "sjl/errors.hpp"
#include "sjl/oracle.hpp"
#include "sjl/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace sjl {

DataFormat parse_format(const std::string& name) {
    if (name == "csv" || name == "dense-csv") return DataFormat::DenseCsv;
    if (name == "mtx" || name == "matrix-market") return DataFormat::MatrixMarket;
    throw ArgumentError("unknown data format '" + name + "' (expected csv or mtx)");
}

std::string to_string(DataFormat format) { return format == DataFormat::DenseCsv ? "dense-csv" : "matrix-market"; }

SparseVector Dataset::row(std::size_t i) const {
    if (i >= size()) throw ArgumentError("row index out of range");
    SparseVector out;
    out.dimension = dimension;
    out.indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                       indices.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                      values.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    return out;
}

void Dataset::push_row(const std::vector<double>& dense) {
    if (size() == 0 && dimension == 0) dimension = dense.size();
    if (dense.size() != dimension) throw ArgumentError("row length does not match the dataset dimension");
    for (std::size_t j = 0; j < dense.size(); ++j) {
        if (dense[j] == 0.0) continue;
        indices.push_back(static_cast<std::uint32_t>(j));
        values.push_back(dense[j]);
    }
    offsets.push_back(indices.size());
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw LoadError("cannot parse '" + std::string(field) + "' as a number", line);
    }
    if (!std::isfinite(value)) throw LoadError("non-finite value '" + std::string(field) + "'", line);
    return value;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
    Dataset data;
    data.source = source;
    data.format = DataFormat::DenseCsv;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = options.header;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        row.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = content.find(',', start);
            row.push_back(parse_number(content.substr(start, comma - start), line_no));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (data.size() == 0) {
            data.dimension = row.size();
        } else if (row.size() != data.dimension) {
            throw LoadError("ragged row: expected " + std::to_string(data.dimension) + " fields, got " +
                                std::to_string(row.size()),
                            line_no);
        }
        data.push_row(row);
    }
    if (data.size() == 0) throw LoadError("empty dataset");
    return data;
}

Dataset parse_matrix_market(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw LoadError("empty dataset");
    ++line_no;
    std::istringstream banner(line);
    std::string tag, object, layout, field, symmetry;
    banner >> tag >> object >> layout >> field >> symmetry;
    if (tag != "%%MatrixMarket") throw LoadError("missing %%MatrixMarket banner", line_no);
    object = lower(object);
    layout = lower(layout);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") throw LoadError("unsupported Matrix Market object '" + object + "'", line_no);
    if (layout != "coordinate") throw LoadError("unsupported Matrix Market layout '" + layout + "' (need coordinate)", line_no);
    if (field != "real" && field != "integer" && field != "pattern") {
        throw LoadError("unsupported Matrix Market field '" + field + "'", line_no);
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw LoadError("unsupported Matrix Market symmetry '" + symmetry + "'", line_no);
    }

    std::uint64_t rows = 0, cols = 0, nnz = 0;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty() || content.front() == '%') continue;
        std::istringstream size_line{std::string(content)};
        if (!(size_line >> rows >> cols >> nnz)) throw LoadError("malformed size line", line_no);
        have_size = true;
        break;
    }
    if (!have_size) throw LoadError("missing size line", line_no);
    if (rows == 0 || cols == 0) throw LoadError("empty dataset");
    if (symmetry == "symmetric" && rows != cols) throw LoadError("symmetric matrix must be square", line_no);

    std::vector<std::map<std::uint32_t, double>> entries(rows);
    std::uint64_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty() || content.front() == '%') continue;
        std::istringstream entry{std::string(content)};
        std::uint64_t i = 0, j = 0;
        if (!(entry >> i >> j)) throw LoadError("malformed entry", line_no);
        double value = 1.0;
        if (field != "pattern") {
            std::string token;
            if (!(entry >> token)) throw LoadError("entry is missing its value", line_no);
            value = parse_number(token, line_no);
        }
        if (i == 0 || j == 0 || i > rows || j > cols) throw LoadError("entry index out of range", line_no);
        entries[i - 1][static_cast<std::uint32_t>(j - 1)] += value;
        if (symmetry == "symmetric" && i != j) entries[j - 1][static_cast<std::uint32_t>(i - 1)] += value;
        ++seen;
    }
    if (seen != nnz) {
        throw LoadError("header announces " + std::to_string(nnz) + " entries but file has " + std::to_string(seen));
    }

    Dataset data;
    data.source = source;
    data.format = DataFormat::MatrixMarket;
    data.dimension = cols;
    for (const auto& r : entries) {
        for (const auto& [col, value] : r) {
            if (value == 0.0) continue;
            data.indices.push_back(col);
            data.values.push_back(value);
        }
        data.offsets.push_back(data.indices.size());
    }
    return data;
}

Dataset load(const std::filesystem::path& path, DataFormat format, const CsvOptions& csv) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    return format == DataFormat::DenseCsv ? parse_csv(in, csv, path.string()) : parse_matrix_market(in, path.string());
}

SparseVector difference(const SparseVector& a, const SparseVector& b) {
    if (a.dimension != b.dimension) throw ArgumentError("difference of vectors with different dimensions");
    SparseVector out;
    out.dimension = a.dimension;
    std::size_t i = 0, j = 0;
    auto emit = [&](std::uint32_t idx, double v) {
        if (v == 0.0) return;
        out.indices.push_back(idx);
        out.values.push_back(v);
    };
    while (i < a.indices.size() || j < b.indices.size()) {
        if (j == b.indices.size() || (i < a.indices.size() && a.indices[i] < b.indices[j])) {
            emit(a.indices[i], a.values[i]);
            ++i;
        } else if (i == a.indices.size() || b.indices[j] < a.indices[i]) {
            emit(b.indices[j], -b.values[j]);
            ++j;
        } else {
            emit(a.indices[i], a.values[i] - b.values[j]);
            ++i;
            ++j;
        }
    }
    return out;
}

double dispersion(const SparseVector& x) {
    double peak = 0.0, sq = 0.0;
    for (double v : x.values) {
        peak = std::max(peak, std::abs(v));
        sq += v * v;
    }
    if (sq == 0.0) return std::nan("");
    // Rounding can land a hair outside the feasible range; the exact value cannot.
    return std::clamp(peak / std::sqrt(sq), min_dispersion(x.dimension), 1.0);
}

std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t size, std::uint64_t seed) {
    const std::size_t k = std::min(size, population);
    std::vector<std::uint32_t> picked;
    picked.reserve(k);
    sample_distinct(seed, 0xda7a, population, k, picked);
    std::vector<std::size_t> out(picked.begin(), picked.end());
    std::sort(out.begin(), out.end());
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

namespace {

DispersionProfile profile_impl(const Dataset& data, std::size_t subsample_size, std::uint64_t seed, bool parallel) {
    if (data.size() < 2) throw ArgumentError("dispersion profile needs at least two rows");
    DispersionProfile profile;
    profile.subsample = subsample_indices(data.size(), subsample_size, seed);
    const std::size_t k = profile.subsample.size();
    std::vector<SparseVector> rows;
    rows.reserve(k);
    for (auto idx : profile.subsample) rows.push_back(data.row(idx));

    const std::size_t pair_count = k * (k - 1) / 2;
    std::vector<double> raw(pair_count);
    auto pair_value = [&](std::size_t a) {
        // Row a of the upper triangle starts at a*k - a(a+1)/2.
        const std::size_t base = a * k - a * (a + 1) / 2;
        for (std::size_t b = a + 1; b < k; ++b) raw[base + (b - a - 1)] = dispersion(difference(rows[a], rows[b]));
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t a = 0; a < static_cast<std::int64_t>(k); ++a) pair_value(static_cast<std::size_t>(a));
    } else {
        for (std::size_t a = 0; a < k; ++a) pair_value(a);
    }

    for (double v : raw) {
        if (std::isnan(v)) {
            ++profile.skipped_pairs;
        } else {
            profile.values.push_back(v);
        }
    }
    if (profile.values.empty()) throw DomainError("degenerate dataset: every sampled pair of rows is identical");
    profile.sample_pairs = profile.values.size();
    auto sorted = profile.values;
    std::sort(sorted.begin(), sorted.end());
    for (double level : profile.quantile_levels) profile.quantiles.push_back(quantile_sorted(sorted, level));
    profile.typical = quantile_sorted(sorted, 0.5);
    return profile;
}

}  // namespace

DispersionProfile dispersion_profile(const Dataset& data, std::size_t subsample_size, std::uint64_t seed) {
    return profile_impl(data, subsample_size, seed, true);
}

DispersionProfile dispersion_profile_serial(const Dataset& data, std::size_t subsample_size, std::uint64_t seed) {
    return profile_impl(data, subsample_size, seed, false);
}

std::vector<DistortionRow> empirical_distortion_profile(const Dataset& data, const DistortionExperiment& ex) {
    if (ex.pairs == 0 || ex.seeds == 0 || ex.epsilon_grid.empty()) return {};
    make_params(std::max<std::uint64_t>(2, data.dimension), ex.m, ex.s, 1.0);
    for (double eps : ex.epsilon_grid) {
        if (!(eps > 0.0)) throw ArgumentError("epsilon grid values must be positive");
    }
    const auto profile = dispersion_profile(data, kDefaultSubsample, ex.seed);
    const std::uint64_t n = data.dimension;

    // Pick distinct, non-identical pairs.
    CounterRng rng(ex.seed, 0x9a125);
    std::vector<SparseVector> diffs;
    std::size_t attempts = 0;
    while (diffs.size() < ex.pairs && attempts < 100 * ex.pairs) {
        ++attempts;
        const auto i = rng.below(data.size());
        auto j = rng.below(data.size() - 1);
        if (j >= i) ++j;
        auto diff = difference(data.row(i), data.row(j));
        if (!diff.values.empty()) diffs.push_back(std::move(diff));
    }
    if (diffs.empty()) throw DomainError("degenerate dataset: could not find a pair of distinct rows");

    std::vector<SparseEmbedding> embeddings;
    embeddings.reserve(ex.seeds);
    for (std::size_t k = 0; k < ex.seeds; ++k) {
        embeddings.push_back(SparseEmbedding::sample(n, ex.m, ex.s, SamplingVariant::ColumnWithoutReplacement,
                                                     derive_seed(ex.seed, k)));
    }

    const std::size_t grid = ex.epsilon_grid.size();
    std::vector<std::uint64_t> exceed(diffs.size() * grid, 0);
    std::vector<double> proved(diffs.size() * grid, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t pi = 0; pi < static_cast<std::int64_t>(diffs.size()); ++pi) {
        const auto& x = diffs[pi];
        const ErrorMomentBounds bounds(BoundParams{n, ex.m, ex.s, dispersion(x)}, ex.d_max);
        for (const auto& emb : embeddings) {
            const double e = std::abs(emb.distortion(x));
            for (std::size_t g = 0; g < grid; ++g) exceed[pi * grid + g] += e > ex.epsilon_grid[g];
        }
        for (std::size_t g = 0; g < grid; ++g) proved[pi * grid + g] = bounds.failure_probability(ex.epsilon_grid[g]);
    }

    const ErrorMomentBounds typical(BoundParams{n, ex.m, ex.s, profile.typical}, ex.d_max);
    std::vector<DistortionRow> rows;
    for (std::size_t g = 0; g < grid; ++g) {
        std::uint64_t count = 0;
        double proved_sum = 0.0;
        for (std::size_t pi = 0; pi < diffs.size(); ++pi) {
            count += exceed[pi * grid + g];
            proved_sum += proved[pi * grid + g];
        }
        const std::uint64_t samples = diffs.size() * embeddings.size();
        const auto ci = wilson_interval(count, samples);
        rows.push_back({ex.epsilon_grid[g], samples, count, ci.point_estimate, ci.wilson_99_low, ci.wilson_99_high,
                        proved_sum / static_cast<double>(diffs.size()),
                        typical.failure_probability(ex.epsilon_grid[g])});
    }
    return rows;
}

}  // namespace sjl
