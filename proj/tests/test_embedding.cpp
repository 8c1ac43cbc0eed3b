#include "doctest.h"
#include "support.hpp"

#include "sjl/embedding.hpp"
#include "sjl/errors.hpp"
#include "sjl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace sjl;

namespace {

const SamplingVariant kColumnVariants[] = {SamplingVariant::ColumnWithoutReplacement,
                                           SamplingVariant::WithReplacement};

double norm_sq(const std::vector<double>& y) {
    double acc = 0;
    for (double v : y) acc += v * v;
    return acc;
}

}  // namespace

TEST_CASE("variant names round trip") {
    for (auto v : {SamplingVariant::ColumnWithoutReplacement, SamplingVariant::RowWithoutReplacement,
                   SamplingVariant::WithReplacement}) {
        CHECK(parse_variant(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_variant("gaussian"), ArgumentError);
}

TEST_CASE("sample: s = m fills every column") {
    const auto e = SparseEmbedding::sample(3, 4, 4);
    for (std::uint64_t c = 0; c < 3; ++c) {
        auto rows = e.column_rows(c);
        std::set<std::uint32_t> distinct(rows.begin(), rows.end());
        CHECK(distinct == std::set<std::uint32_t>{0, 1, 2, 3});
    }
}

TEST_CASE("sample: column-wor structure") {
    CounterRng rng(41, 0);
    for (int c = 0; c < 50; ++c) {
        const std::uint64_t n = 1 + rng.below(200);
        const std::uint64_t m = 1 + rng.below(300);
        const std::uint64_t s = 1 + rng.below(m);
        const auto e = SparseEmbedding::sample(n, m, s, SamplingVariant::ColumnWithoutReplacement, rng.next());
        CHECK(e.nonzeros() == n * s);
        CHECK(e.scale() == 1.0 / std::sqrt(static_cast<double>(s)));
        for (std::uint64_t col = 0; col < n; ++col) {
            auto rows = e.column_rows(col);
            auto signs = e.column_signs(col);
            REQUIRE(rows.size() == s);
            std::set<std::uint32_t> distinct(rows.begin(), rows.end());
            CHECK(distinct.size() == s);
            CHECK(*distinct.rbegin() < m);
            CHECK(std::all_of(signs.begin(), signs.end(), [](std::int8_t g) { return g == 1 || g == -1; }));
        }
    }
}

TEST_CASE("sample: row variant puts s entries in every row") {
    const std::uint64_t n = 50, m = 20, s = 7;
    const auto e = SparseEmbedding::sample(n, m, s, SamplingVariant::RowWithoutReplacement, 3);
    std::vector<std::uint64_t> per_row(m, 0);
    for (std::uint64_t col = 0; col < n; ++col) {
        auto rows = e.column_rows(col);
        std::set<std::uint32_t> distinct(rows.begin(), rows.end());
        CHECK(distinct.size() == rows.size());
        for (auto r : rows) ++per_row[r];
    }
    CHECK(std::all_of(per_row.begin(), per_row.end(), [](std::uint64_t k) { return k == s; }));
    CHECK(e.scale() == doctest::Approx(std::sqrt(static_cast<double>(n) / (m * s))));
}

TEST_CASE("sample: determinism") {
    const auto a = SparseEmbedding::sample(1000, 100, 3, SamplingVariant::ColumnWithoutReplacement, 17);
    const auto b = SparseEmbedding::sample(1000, 100, 3, SamplingVariant::ColumnWithoutReplacement, 17);
    CHECK(a == b);
    const auto c = SparseEmbedding::sample(1000, 100, 3, SamplingVariant::ColumnWithoutReplacement, 18);
    CHECK_FALSE(a == c);
    const auto x = test::random_unit_vector(1000, *std::make_unique<CounterRng>(1, 1));
    CHECK(a.apply(x) == b.apply(x));
}

TEST_CASE("sample: applied magnitude is 1/sqrt(s)") {
    const auto e = SparseEmbedding::sample(20, 10, 3, SamplingVariant::ColumnWithoutReplacement, 5);
    for (std::uint64_t i = 0; i < 20; ++i) {
        std::vector<double> x(20, 0.0);
        x[i] = 1.0;
        const auto y = e.apply(x);
        for (double yi : y) CHECK((yi == 0.0 || std::abs(yi) == 1.0 / std::sqrt(3.0)));
    }
}

TEST_CASE("sample: parameter errors") {
    CHECK_THROWS_AS(SparseEmbedding::sample(10, 5, 0), ArgumentError);
    CHECK_THROWS_AS(SparseEmbedding::sample(10, 5, 6), ArgumentError);
    CHECK_THROWS_AS(SparseEmbedding::sample(10, 5, 11, SamplingVariant::RowWithoutReplacement), ArgumentError);
    CHECK_NOTHROW(SparseEmbedding::sample(10, 5, 8, SamplingVariant::RowWithoutReplacement));
    CHECK_THROWS_AS(SparseEmbedding::sample(0, 5, 1), ArgumentError);
}

TEST_CASE("apply: zero, length mismatch, linearity") {
    const auto e = SparseEmbedding::sample(30, 12, 4, SamplingVariant::ColumnWithoutReplacement, 9);
    const auto y0 = e.apply(std::vector<double>(30, 0.0));
    CHECK(std::all_of(y0.begin(), y0.end(), [](double v) { return v == 0.0; }));
    CHECK_THROWS_AS(e.apply(std::vector<double>(29, 1.0)), ArgumentError);
    CHECK_THROWS_AS(e.apply(SparseVector{31, {}, {}}), ArgumentError);

    CounterRng rng(42, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        auto x = test::random_unit_vector(30, rng);
        const double alpha = (rng.uniform() - 0.5) * 100;
        auto ax = x;
        for (auto& v : ax) v *= alpha;
        const auto y = e.apply(x);
        const auto ya = e.apply(ax);
        for (std::size_t r = 0; r < y.size(); ++r) CHECK(std::abs(ya[r] - alpha * y[r]) <= 1e-12 * std::max(1.0, std::abs(alpha)));
    }
}

TEST_CASE("apply: sparse input matches dense input") {
    CounterRng rng(43, 0);
    const auto e = SparseEmbedding::sample(64, 16, 3, SamplingVariant::ColumnWithoutReplacement, 2);
    for (int c = 0; c < 50; ++c) {
        std::vector<double> dense(64, 0.0);
        SparseVector sparse{64, {}, {}};
        for (std::uint32_t i = 0; i < 64; ++i) {
            if (rng.below(4) == 0) {
                dense[i] = rng.uniform() - 0.5;
                sparse.indices.push_back(i);
                sparse.values.push_back(dense[i]);
            }
        }
        CHECK(e.apply(sparse) == e.apply(dense));
        if (!sparse.indices.empty()) CHECK(e.distortion(sparse) == e.distortion(dense));
    }
}

TEST_CASE("distortion: one-sparse inputs are preserved exactly") {
    for (auto variant : kColumnVariants) {
        for (std::uint64_t s : {1ull, 2ull, 3ull, 7ull, 16ull}) {
            const auto e = SparseEmbedding::sample(40, 16, s, variant, 100 + s);
            for (std::uint64_t i = 0; i < 40; ++i) {
                std::vector<double> x(40, 0.0);
                x[i] = -2.5;
                CAPTURE(to_string(variant));
                CAPTURE(s);
                if (variant == SamplingVariant::ColumnWithoutReplacement) {
                    CHECK(e.distortion(x) == 0.0);
                    CHECK(norm_sq(e.apply(std::vector<double>(x.size(), 0.0))) == 0.0);
                } else {
                    // duplicates add up; the norm is preserved only when no row repeats
                    auto rows = e.column_rows(i);
                    std::set<std::uint32_t> distinct(rows.begin(), rows.end());
                    if (distinct.size() == rows.size()) CHECK(e.distortion(x) == 0.0);
                }
            }
        }
    }
    CHECK_THROWS_AS(SparseEmbedding::sample(4, 4, 2).distortion(std::vector<double>(4, 0.0)), ArgumentError);
}

TEST_CASE("distortion: unbiasedness over seeds") {
    // mean of |Ax|^2 over 10^4 embeddings within 4 standard errors of |x|^2
    CounterRng rng(44, 0);
    for (auto variant : {SamplingVariant::ColumnWithoutReplacement, SamplingVariant::RowWithoutReplacement,
                         SamplingVariant::WithReplacement}) {
        const auto x = test::random_unit_vector(40, rng);
        const int trials = 10000;
        double sum = 0, sum_sq = 0;
        for (int t = 0; t < trials; ++t) {
            const auto e = SparseEmbedding::sample(40, 10, 3, variant, derive_seed(7, t));
            const double d = e.distortion(x);
            sum += d;
            sum_sq += d * d;
        }
        const double mean = sum / trials;
        const double se = std::sqrt((sum_sq / trials - mean * mean) / (trials - 1));
        CAPTURE(to_string(variant));
        CHECK(std::abs(mean) <= 4 * se);
    }
}

TEST_CASE("column-wor marginal P(A_ri != 0) = s/m") {
    const std::uint64_t n = 2000, m = 25, s = 5;
    const auto e = SparseEmbedding::sample(n, m, s, SamplingVariant::ColumnWithoutReplacement, 11);
    std::vector<std::uint64_t> hits(m, 0);
    for (std::uint64_t col = 0; col < n; ++col)
        for (auto r : e.column_rows(col)) ++hits[r];
    const double p = static_cast<double>(s) / m;
    const double sd = std::sqrt(n * p * (1 - p));
    for (std::uint64_t r = 0; r < m; ++r) {
        CAPTURE(r);
        // 4.5 sigma per row keeps the family-wise false alarm rate tiny across 25 rows
        CHECK(std::abs(static_cast<double>(hits[r]) - n * p) <= 4.5 * sd);
    }
}

TEST_CASE("sampling is independent of the thread count") {
    for (auto variant : {SamplingVariant::ColumnWithoutReplacement, SamplingVariant::RowWithoutReplacement,
                         SamplingVariant::WithReplacement}) {
        set_thread_count(1);
        const auto one = SparseEmbedding::sample(5000, 300, 8, variant, 23);
        set_thread_count(4);
        const auto four = SparseEmbedding::sample(5000, 300, 8, variant, 23);
        set_thread_count(0);
        CHECK(one == four);
    }
}

TEST_CASE("streamed distortion equals the materialized matrix") {
    CounterRng rng(45, 0);
    std::vector<double> scratch(200);
    for (int c = 0; c < 50; ++c) {
        const std::uint64_t n = 1 + rng.below(300);
        const std::uint64_t m = 1 + rng.below(200);
        const std::uint64_t s = 1 + rng.below(m);
        const std::uint64_t seed = rng.next();
        const auto x = test::random_unit_vector(n, rng);
        const auto e = SparseEmbedding::sample(n, m, s, SamplingVariant::ColumnWithoutReplacement, seed);
        CHECK(streamed_distortion(m, s, seed, x, scratch) == e.distortion(x));
    }
    CHECK_THROWS_AS(streamed_distortion(300, 2, 0, std::vector<double>{1.0}, scratch), ArgumentError);
}

TEST_CASE("sample_distinct: Floyd output") {
    std::vector<std::uint32_t> out;
    CounterRng rng(46, 0);
    for (int c = 0; c < test::kPropertyCases; ++c) {
        const std::uint64_t universe = 1 + rng.below(100);
        const std::uint64_t count = rng.below(universe + 1);
        const std::uint64_t key = rng.next();
        out.clear();
        sample_distinct(key, 3, universe, count, out);
        REQUIRE(out.size() == count);
        std::set<std::uint32_t> distinct(out.begin(), out.end());
        CHECK(distinct.size() == count);
        if (count > 0) CHECK(*distinct.rbegin() < universe);
        std::vector<std::uint32_t> again;
        sample_distinct(key, 3, universe, count, again);
        CHECK(again == out);
    }
}

TEST_CASE("JSON record holds only the header and reproduces the matrix") {
    for (auto variant : {SamplingVariant::ColumnWithoutReplacement, SamplingVariant::RowWithoutReplacement,
                         SamplingVariant::WithReplacement}) {
        const auto e = SparseEmbedding::sample(500, 50, 4, variant, 0xdeadbeefcafef00dULL);
        const auto record = e.to_json();
        CHECK(record.at("format") == "sjl-embedding");
        CHECK(record.at("seed").get<std::uint64_t>() == 0xdeadbeefcafef00dULL);
        CHECK(record.dump().size() < 300);
        const auto back = SparseEmbedding::from_json(nlohmann::json::parse(record.dump()));
        CHECK(back == e);
    }
    auto bad = SparseEmbedding::sample(5, 4, 2).to_json();
    bad["version"] = 99;
    CHECK_THROWS_AS(SparseEmbedding::from_json(bad), ArgumentError);
    bad = nlohmann::json{{"format", "other"}};
    CHECK_THROWS_AS(SparseEmbedding::from_json(bad), ArgumentError);
}
