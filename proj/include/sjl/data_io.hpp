#pragma once

#include "sjl/embedding.hpp"
#include "sjl/tail_bounds.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sjl {

enum class DataFormat { DenseCsv, MatrixMarket };

DataFormat parse_format(const std::string& name);
std::string to_string(DataFormat format);

// N data points of dimension n, stored row-compressed (zeros dropped).
struct Dataset {
    std::size_t dimension = 0;
    std::vector<std::uint64_t> offsets{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::string source;
    DataFormat format = DataFormat::DenseCsv;

    std::size_t size() const noexcept { return offsets.size() - 1; }
    SparseVector row(std::size_t i) const;
    // The first row fixes the dimension when it is still unset.
    void push_row(const std::vector<double>& dense);
};

struct CsvOptions {
    bool header = false;
};

Dataset load(const std::filesystem::path& path, DataFormat format, const CsvOptions& csv = {});
Dataset parse_csv(std::istream& in, const CsvOptions& options = {}, const std::string& source = "<stream>");
Dataset parse_matrix_market(std::istream& in, const std::string& source = "<stream>");

// a - b with exact zeros removed.
SparseVector difference(const SparseVector& a, const SparseVector& b);

// |x|_inf / |x|_2, or nullopt-like NaN for the zero vector.
double dispersion(const SparseVector& x);

struct DispersionProfile {
    std::uint64_t sample_pairs = 0;   // pairs with a nonzero difference
    std::uint64_t skipped_pairs = 0;  // identical rows
    std::vector<std::size_t> subsample;  // row indices, ascending file order
    std::vector<double> values;          // pair order: (i, j) with i < j over the subsample
    std::vector<double> quantile_levels{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
    std::vector<double> quantiles;
    double typical = 0;  // median
};

inline constexpr std::size_t kDefaultSubsample = 250;

// Uniform subsample without replacement (indices from `seed`), then v over all distinct pairs.
std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t size, std::uint64_t seed);
DispersionProfile dispersion_profile(const Dataset& data, std::size_t subsample_size = kDefaultSubsample,
                                     std::uint64_t seed = 0);
DispersionProfile dispersion_profile_serial(const Dataset& data, std::size_t subsample_size = kDefaultSubsample,
                                            std::uint64_t seed = 0);

// Linear-interpolation quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double level);

struct DistortionRow {
    double epsilon = 0;
    std::uint64_t samples = 0;
    std::uint64_t exceed = 0;
    double exceed_rate = 0;
    double wilson_99_low = 0;
    double wilson_99_high = 0;
    double proved_pair_v = 0;     // mean over samples of delta-hat at each pair's own v
    double proved_typical_v = 0;  // delta-hat at the dataset's typical v
};

struct DistortionExperiment {
    std::uint64_t m = 0;
    std::uint64_t s = 0;
    std::size_t pairs = 0;
    std::size_t seeds = 0;
    std::vector<double> epsilon_grid;
    std::uint64_t seed = 0;
    int d_max = kDefaultMaxOrder;
};

// Empirical P(|E(x1 - x2)| > eps |x1 - x2|^2) over sampled pairs and embeddings,
// next to the proved bound at the per-pair and at the typical dispersion.
std::vector<DistortionRow> empirical_distortion_profile(const Dataset& data, const DistortionExperiment& experiment);

}  // namespace sjl
