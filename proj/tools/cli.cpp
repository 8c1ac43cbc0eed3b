#include "cli.hpp"

#include "output.hpp"

#include "sjl/data_io.hpp"
#include "sjl/embedding.hpp"
#include "sjl/errors.hpp"
#include "sjl/moment_engine.hpp"
#include "sjl/oracle.hpp"
#include "sjl/parallel.hpp"
#include "sjl/rng.hpp"
#include "sjl/row_bound.hpp"
#include "sjl/tail_bounds.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

namespace sjl::cli {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string format;
    std::string output;
};

struct BoundFlags {
    std::uint64_t n = 0, m = 0, s = 0;
    double v = 1.0;
    double delta = 0.0;
    std::string mode = "corollary";
    int d_max = kDefaultMaxOrder;
};

struct CurveFlags {
    std::uint64_t n = 10000;
    std::optional<std::uint64_t> m, s;
    double v = 0.1;
    double eps_min = 0.05, eps_max = 1.0;
    std::size_t points = 20;
    std::string spacing = "lin";
    double confidence = 0.75;
    double s_ratio = 0.1;
    double epsilon = 0.5;
    double pairs_min = 10, pairs_max = 1e6;
    int d_max = kDefaultMaxOrder;
};

struct RatioFlags {
    std::uint64_t n = 10000;
    double p_min = 1e-3, p_max = 0.5;
    std::size_t p_points = 1;
    double v_min = 1e-2, v_max = 1.0;
    std::size_t v_points = 20;
    double d_min = 2, d_max = 32, d_step = 2;
};

struct DataFlags {
    std::string input;
    std::string data_format = "csv";
    bool header = false;
};

struct DisperseFlags {
    std::size_t subsample = kDefaultSubsample;
    bool values = false;
};

struct ProjectFlags {
    std::uint64_t m = 0, s = 1;
    std::string variant = "column-wor";
    std::string embedding_in, embedding_out;
};

struct DistortionFlags {
    std::uint64_t m = 0, s = 1;
    std::size_t pairs = 200, seeds = 10;
    double eps_min = 0.05, eps_max = 1.0;
    std::size_t points = 20;
    int d_max = kDefaultMaxOrder;
};

struct ExactFlags {
    std::uint64_t n_max = 6;
    int d_max = 6;
    std::vector<std::string> p{"1/4", "1/2"};
    std::size_t vectors = 20;
    std::size_t pairs = 200;
};

struct McFlags {
    std::uint64_t n = 0, m = 0, s = 0;
    double v = 1.0;
    double delta = 0.25;
    std::optional<double> epsilon;
    std::uint64_t trials = 100000;
    std::string mode = "optimized";
    int d_max = kDefaultMaxOrder;
};

struct BenchFlags {
    std::size_t samples = 1000;
    std::string mode = "corollary";
    std::size_t bins = 20;
    int d_max = kDefaultMaxOrder;
    bool raw = false;
};

std::vector<double> make_grid(double lo, double hi, std::size_t points, bool logarithmic) {
    std::vector<double> grid;
    if (points == 0) return grid;
    if (points == 1) return {lo};
    if (logarithmic && (lo <= 0 || hi <= 0)) throw ArgumentError("logarithmic grid needs positive endpoints");
    grid.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        double x = logarithmic ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
        if (i == points - 1) x = hi;
        grid.push_back(x);
    }
    return grid;
}

EpsilonMode parse_mode(const std::string& name) {
    if (name == "corollary") return EpsilonMode::Corollary;
    if (name == "optimized") return EpsilonMode::Optimized;
    throw ArgumentError("unknown mode '" + name + "' (expected corollary or optimized)");
}

void warn_order(int d, std::uint64_t m, std::ostream& err) {
    if (static_cast<std::uint64_t>(d) * 2 > m) {
        err << "warning: moment order d = " << d << " exceeds m/2 = " << m / 2
            << "; the i.i.d. aggregation step is loose in this regime and the bound is not verified there\n";
    }
}

double ratio_or_nan(double num, double den) {
    if (den == 0.0) return num == 0.0 ? std::nan("") : std::numeric_limits<double>::infinity();
    return num / den;
}

Cell optional_cell(double x) {
    if (std::isnan(x)) return std::monostate{};
    return x;
}

void add_globals(RunConfig& config, const Globals& g) {
    config.set("seed", g.seed);
    config.set("threads", static_cast<std::int64_t>(thread_count()));
    config.set("format", g.format);
    config.set("output", g.output.empty() ? std::string("-") : g.output);
}

// bound

Report cmd_bound(const BoundFlags& f, const Globals& g, std::ostream& err) {
    const BoundParams params = make_params(f.n, f.m, f.s, f.v);
    const EpsilonMode mode = parse_mode(f.mode);
    Report report{RunConfig("bound"), {}, {}};
    auto& c = report.config;
    c.set("n", f.n);
    c.set("m", f.m);
    c.set("s", f.s);
    c.set("v", f.v);
    c.set("delta", f.delta);
    c.set("mode", f.mode);
    c.set("d_max", static_cast<std::int64_t>(f.d_max));
    add_globals(c, g);

    const EpsilonResult result = epsilon_bound(params, f.delta, mode, f.d_max);
    const EpsilonResult baseline = epsilon_bound(params, f.delta, mode, f.d_max, RowBoundKind::Baseline);
    warn_order(result.d, f.m, err);
    report.summary = {
        {"epsilon", result.epsilon},
        {"q", result.q},
        {"d", static_cast<std::int64_t>(result.d)},
        {"error_moment", result.q / static_cast<double>(f.s)},
        {"confidence", 1.0 - f.delta},
        {"epsilon_baseline", baseline.epsilon},
        {"d_baseline", static_cast<std::int64_t>(baseline.d)},
    };
    return report;
}

// curves

Report curves_header(const std::string& family, const CurveFlags& f, const Globals& g) {
    Report report{RunConfig("curves " + family), {}, {}};
    auto& c = report.config;
    c.set("family", family);
    c.set("n", f.n);
    c.set("v", f.v);
    c.set("d_max", static_cast<std::int64_t>(f.d_max));
    add_globals(c, g);
    return report;
}

std::vector<double> epsilon_grid(const CurveFlags& f, RunConfig& c) {
    if (f.spacing != "lin" && f.spacing != "log") throw ArgumentError("--spacing must be lin or log");
    c.set("eps_min", f.eps_min);
    c.set("eps_max", f.eps_max);
    c.set("points", static_cast<std::uint64_t>(f.points));
    c.set("spacing", f.spacing);
    if (f.points > 0 && (f.eps_min <= 0 || f.eps_max < f.eps_min)) {
        throw ArgumentError("need 0 < --eps-min <= --eps-max");
    }
    return make_grid(f.eps_min, f.eps_max, f.points, f.spacing == "log");
}

std::uint64_t default_m(const CurveFlags& f) {
    return f.m.value_or(std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::llround(0.1 * static_cast<double>(f.n)))));
}

Report curves_confidence(const CurveFlags& f, const Globals& g, std::ostream& err) {
    Report report = curves_header("confidence", f, g);
    const std::uint64_t m = default_m(f);
    const std::uint64_t s =
        f.s.value_or(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(0.01 * static_cast<double>(m)))));
    report.config.set("m", m);
    report.config.set("s", s);
    const auto grid = epsilon_grid(f, report.config);
    const BoundParams params = make_params(f.n, m, s, f.v);
    warn_order(f.d_max, m, err);

    Table table{"confidence", {"epsilon", "new", "baseline", "ratio"}, {}};
    if (!grid.empty()) {
        const ErrorMomentBounds sharp(params, f.d_max, RowBoundKind::Sharp);
        const ErrorMomentBounds base(params, f.d_max, RowBoundKind::Baseline);
        for (double eps : grid) {
            const double fail_new = sharp.failure_probability(eps);
            const double fail_base = base.failure_probability(eps);
            table.rows.push_back({eps, 1.0 - fail_new, 1.0 - fail_base, optional_cell(ratio_or_nan(fail_new, fail_base))});
        }
    }
    report.summary = {{"quantity", std::string("confidence 1-delta; ratio = failure_new / failure_baseline")}};
    report.tables.push_back(std::move(table));
    return report;
}

Report curves_sparsity(const CurveFlags& f, const Globals& g) {
    Report report = curves_header("sparsity", f, g);
    const std::uint64_t m = default_m(f);
    report.config.set("m", m);
    report.config.set("confidence", f.confidence);
    const auto grid = epsilon_grid(f, report.config);
    make_params(f.n, m, 1, f.v);

    Table table{"sparsity", {"epsilon", "new", "baseline", "ratio"}, {}};
    SparsityQuery q{f.n, m, 0.0, f.confidence, f.v, f.d_max, RowBoundKind::Sharp};
    const auto s_new = min_sparsity_curve(q, grid);
    q.kind = RowBoundKind::Baseline;
    const auto s_base = min_sparsity_curve(q, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        table.rows.push_back({grid[i], s_new[i], s_base[i], static_cast<double>(s_new[i]) / static_cast<double>(s_base[i])});
    }
    report.summary = {{"quantity", std::string("least sparsity s reaching the confidence; s = m where none does")}};
    report.tables.push_back(std::move(table));
    return report;
}

SparsityPolicy dimension_policy(const CurveFlags& f, RunConfig& c) {
    SparsityPolicy policy;
    if (f.s) {
        policy.rule = SparsityRule::FixedCount;
        policy.count = *f.s;
        c.set("s", *f.s);
    } else {
        policy.rule = SparsityRule::FixedRatio;
        policy.ratio = f.s_ratio;
        c.set("s_ratio", f.s_ratio);
    }
    policy.validate();
    return policy;
}

Cell dimension_cell(const std::optional<std::uint64_t>& m, std::uint64_t n) { return m.value_or(n); }

double dimension_ratio(const std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b, std::uint64_t n) {
    return static_cast<double>(a.value_or(n)) / static_cast<double>(b.value_or(n));
}

Report curves_dimension(const CurveFlags& f, const Globals& g) {
    Report report = curves_header("dimension", f, g);
    const SparsityPolicy policy = dimension_policy(f, report.config);
    report.config.set("confidence", f.confidence);
    const auto grid = epsilon_grid(f, report.config);
    validate_dispersion(f.n, f.v);

    Table table{"dimension", {"epsilon", "new", "baseline", "ratio"}, {}};
    for (double eps : grid) {
        DimensionQuery q{f.n, policy, eps, f.confidence, f.v, f.d_max, RowBoundKind::Sharp};
        const auto m_new = min_dimension(q);
        q.kind = RowBoundKind::Baseline;
        const auto m_base = min_dimension(q);
        table.rows.push_back({eps, dimension_cell(m_new, f.n), dimension_cell(m_base, f.n), dimension_ratio(m_new, m_base, f.n)});
    }
    report.summary = {{"quantity", std::string("least dimension m reaching the confidence; m = n where none does")}};
    report.tables.push_back(std::move(table));
    return report;
}

Report curves_union(const CurveFlags& f, const Globals& g) {
    Report report = curves_header("union", f, g);
    const SparsityPolicy policy = dimension_policy(f, report.config);
    auto& c = report.config;
    c.set("confidence", f.confidence);
    c.set("epsilon", f.epsilon);
    c.set("pairs_min", f.pairs_min);
    c.set("pairs_max", f.pairs_max);
    c.set("points", static_cast<std::uint64_t>(f.points));
    if (f.points > 0 && (f.pairs_min < 1 || f.pairs_max < f.pairs_min)) {
        throw ArgumentError("need 1 <= --pairs-min <= --pairs-max");
    }
    validate_dispersion(f.n, f.v);

    Table table{"union", {"pairs", "new", "baseline", "ratio"}, {}};
    std::uint64_t previous = 0;
    for (double x : make_grid(f.pairs_min, f.pairs_max, f.points, true)) {
        const auto pairs = static_cast<std::uint64_t>(std::llround(x));
        if (pairs == previous) continue;
        previous = pairs;
        DimensionQuery q{f.n, policy, f.epsilon, f.confidence, f.v, f.d_max, RowBoundKind::Sharp};
        const auto m_new = union_bound_dimension(pairs, q);
        q.kind = RowBoundKind::Baseline;
        const auto m_base = union_bound_dimension(pairs, q);
        table.rows.push_back({pairs, dimension_cell(m_new, f.n), dimension_cell(m_base, f.n), dimension_ratio(m_new, m_base, f.n)});
    }
    report.summary = {{"quantity", std::string("least dimension m with the confidence holding jointly over all pairs")}};
    report.tables.push_back(std::move(table));
    return report;
}

// ratio-grid

Report cmd_ratio_grid(const RatioFlags& f, const Globals& g) {
    Report report{RunConfig("ratio-grid"), {}, {}};
    auto& c = report.config;
    c.set("n", f.n);
    c.set("p_min", f.p_min);
    c.set("p_max", f.p_max);
    c.set("p_points", static_cast<std::uint64_t>(f.p_points));
    c.set("v_min", f.v_min);
    c.set("v_max", f.v_max);
    c.set("v_points", static_cast<std::uint64_t>(f.v_points));
    c.set("d_min", f.d_min);
    c.set("d_max", f.d_max);
    c.set("d_step", f.d_step);
    add_globals(c, g);
    if (f.d_step <= 0) throw ArgumentError("--d-step must be positive");

    const auto p = make_grid(f.p_min, f.p_max, f.p_points, true);
    const auto v = make_grid(f.v_min, f.v_max, f.v_points, true);
    std::vector<double> d;
    for (double x = f.d_min; x <= f.d_max + 1e-9; x += f.d_step) d.push_back(x);

    const auto rows = ratio_grid(f.n, p, v, d);
    Table table{"ratio_grid", {"d", "p", "v", "t_new", "t_old", "ratio", "supported"}, {}};
    std::uint64_t supported = 0, above_one = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& r : rows) {
        if (r.supported) {
            ++supported;
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
            if (r.ratio > 1.0) ++above_one;
            table.rows.push_back({r.d, r.p, r.v, r.t_new, r.t_old, r.ratio, true});
        } else {
            table.rows.push_back({r.d, r.p, r.v, std::monostate{}, std::monostate{}, std::monostate{}, false});
        }
    }
    report.summary = {{"cells", static_cast<std::uint64_t>(rows.size())},
                      {"supported", supported},
                      {"min_ratio", supported ? Cell(lo) : Cell(std::monostate{})},
                      {"max_ratio", supported ? Cell(hi) : Cell(std::monostate{})},
                      {"cells_above_one", above_one}};
    report.tables.push_back(std::move(table));
    return report;
}

// data commands

Dataset load_data(const DataFlags& f, RunConfig& c) {
    c.set("input", f.input);
    c.set("data_format", f.data_format);
    c.set("header", f.header);
    return load(f.input, parse_format(f.data_format), CsvOptions{f.header});
}

Report cmd_disperse(const DataFlags& df, const DisperseFlags& f, const Globals& g) {
    Report report{RunConfig("disperse"), {}, {}};
    const Dataset data = load_data(df, report.config);
    report.config.set("subsample", static_cast<std::uint64_t>(f.subsample));
    report.config.set("values", f.values);
    add_globals(report.config, g);

    const DispersionProfile profile = dispersion_profile(data, f.subsample, g.seed);
    report.summary = {{"rows", static_cast<std::uint64_t>(data.size())},
                      {"dimension", static_cast<std::uint64_t>(data.dimension)},
                      {"subsample", static_cast<std::uint64_t>(profile.subsample.size())},
                      {"pairs", profile.sample_pairs},
                      {"skipped_pairs", profile.skipped_pairs},
                      {"v_floor", min_dispersion(data.dimension)},
                      {"typical_v", profile.values.empty() ? Cell(std::monostate{}) : Cell(profile.typical)}};
    Table quantiles{"quantiles", {"level", "v"}, {}};
    for (std::size_t i = 0; i < profile.quantiles.size(); ++i) {
        quantiles.rows.push_back({profile.quantile_levels[i], profile.quantiles[i]});
    }
    report.tables.push_back(std::move(quantiles));
    if (f.values) {
        Table values{"values", {"pair", "v"}, {}};
        for (std::size_t i = 0; i < profile.values.size(); ++i) {
            values.rows.push_back({static_cast<std::uint64_t>(i), profile.values[i]});
        }
        report.tables.push_back(std::move(values));
    }
    return report;
}

Report cmd_project(const DataFlags& df, const ProjectFlags& f, const Globals& g) {
    Report report{RunConfig("project"), {}, {}};
    auto& c = report.config;
    const Dataset data = load_data(df, c);

    std::optional<SparseEmbedding> embedding;
    if (!f.embedding_in.empty()) {
        std::ifstream in(f.embedding_in);
        if (!in) throw LoadError("cannot open embedding record '" + f.embedding_in + "'");
        nlohmann::json record;
        try {
            in >> record;
        } catch (const nlohmann::json::exception& e) {
            throw LoadError("malformed embedding record '" + f.embedding_in + "': " + e.what());
        }
        embedding = SparseEmbedding::from_json(record);
        c.set("embedding_in", f.embedding_in);
    } else {
        if (f.m == 0) throw ArgumentError("--m is required unless --embedding-in is given");
        embedding = SparseEmbedding::sample(data.dimension, f.m, f.s, parse_variant(f.variant), g.seed);
    }
    if (embedding->n() != data.dimension) {
        throw ArgumentError("embedding expects dimension " + std::to_string(embedding->n()) + " but the dataset has " +
                            std::to_string(data.dimension));
    }
    c.set("m", embedding->m());
    c.set("s", embedding->s());
    c.set("variant", to_string(embedding->variant()));
    c.set("embedding_seed", embedding->seed());
    if (!f.embedding_out.empty()) {
        std::ofstream out(f.embedding_out);
        if (!out) throw ArgumentError("cannot write embedding record '" + f.embedding_out + "'");
        out << embedding->to_json().dump(2) << "\n";
        c.set("embedding_out", f.embedding_out);
    }
    add_globals(c, g);

    Table table{"projection", {"row", "distortion"}, {}};
    for (std::uint64_t r = 0; r < embedding->m(); ++r) table.columns.push_back("y" + std::to_string(r));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const SparseVector x = data.row(i);
        const std::vector<double> y = embedding->apply(x);
        const bool zero = std::all_of(x.values.begin(), x.values.end(), [](double a) { return a == 0.0; });
        std::vector<Cell> row{static_cast<std::uint64_t>(i), zero ? Cell(std::monostate{}) : Cell(embedding->distortion(x))};
        for (double yi : y) row.emplace_back(yi);
        table.rows.push_back(std::move(row));
    }
    report.summary = {{"rows", static_cast<std::uint64_t>(data.size())},
                      {"nonzeros", static_cast<std::uint64_t>(embedding->nonzeros())},
                      {"scale", embedding->scale()}};
    report.tables.push_back(std::move(table));
    return report;
}

Report cmd_distortion(const DataFlags& df, const DistortionFlags& f, const Globals& g) {
    Report report{RunConfig("distortion"), {}, {}};
    auto& c = report.config;
    const Dataset data = load_data(df, c);
    c.set("m", f.m);
    c.set("s", f.s);
    c.set("pairs", static_cast<std::uint64_t>(f.pairs));
    c.set("seeds", static_cast<std::uint64_t>(f.seeds));
    c.set("eps_min", f.eps_min);
    c.set("eps_max", f.eps_max);
    c.set("points", static_cast<std::uint64_t>(f.points));
    c.set("d_max", static_cast<std::int64_t>(f.d_max));
    add_globals(c, g);

    DistortionExperiment experiment;
    experiment.m = f.m;
    experiment.s = f.s;
    experiment.pairs = f.pairs;
    experiment.seeds = f.seeds;
    experiment.epsilon_grid = make_grid(f.eps_min, f.eps_max, f.points, false);
    experiment.seed = g.seed;
    experiment.d_max = f.d_max;
    const auto rows = empirical_distortion_profile(data, experiment);

    Table table{"distortion",
                {"epsilon", "samples", "exceed", "exceed_rate", "wilson_99_low", "wilson_99_high", "proved_pair_v",
                 "proved_typical_v"},
                {}};
    for (const auto& r : rows) {
        table.rows.push_back({r.epsilon, r.samples, r.exceed, r.exceed_rate, r.wilson_99_low, r.wilson_99_high,
                              r.proved_pair_v, r.proved_typical_v});
    }
    report.tables.push_back(std::move(table));
    return report;
}

// verify

Rational parse_rational(const std::string& text) {
    try {
        Rational q(text);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw ArgumentError("cannot parse '" + text + "' as a rational number");
    }
}

void add_check(Table& table, const CheckReport& r) {
    table.rows.push_back({r.name, r.cases, r.violations, r.worst_margin, r.passed(), r.first_violation});
}

Report cmd_verify_exact(const ExactFlags& f, const Globals& g, bool& passed) {
    Report report{RunConfig("verify exact"), {}, {}};
    auto& c = report.config;
    c.set("n_max", f.n_max);
    c.set("d_max", static_cast<std::int64_t>(f.d_max));
    std::string joined;
    for (const auto& p : f.p) joined += (joined.empty() ? "" : ";") + p;
    c.set("p", joined);
    c.set("vectors", static_cast<std::uint64_t>(f.vectors));
    c.set("pairs", static_cast<std::uint64_t>(f.pairs));
    add_globals(c, g);

    ExactGrid grid;
    grid.n_max = f.n_max;
    grid.d_max = f.d_max;
    grid.p_values.clear();
    for (const auto& p : f.p) grid.p_values.push_back(parse_rational(p));
    grid.vectors_per_case = f.vectors;
    grid.majorization_pairs = f.pairs;
    grid.seed = g.seed;

    Table table{"checks", {"check", "cases", "violations", "worst_margin", "passed", "first_violation"}, {}};
    const std::vector<CheckReport> checks{
        check_moment_equivalence(grid.n_max, grid.p_values, grid.d_max),
        check_row_bound_soundness(grid),
        check_chaos_inequality(grid, grid.vectors_per_case),
        check_majorization_ordering(grid),
        check_worst_case_attainment(grid),
    };
    passed = true;
    for (const auto& r : checks) {
        add_check(table, r);
        passed = passed && r.passed();
    }
    report.summary = {{"passed", passed}};
    report.tables.push_back(std::move(table));
    return report;
}

Report cmd_verify_mc(const McFlags& f, const Globals& g, std::ostream& err, bool& passed) {
    const BoundParams params = make_params(f.n, f.m, f.s, f.v);
    Report report{RunConfig("verify mc"), {}, {}};
    auto& c = report.config;
    c.set("n", f.n);
    c.set("m", f.m);
    c.set("s", f.s);
    c.set("v", f.v);
    c.set("trials", f.trials);
    c.set("d_max", static_cast<std::int64_t>(f.d_max));

    double epsilon = 0;
    int d = 0;
    if (f.epsilon) {
        epsilon = *f.epsilon;
        c.set("epsilon", epsilon);
    } else {
        const EpsilonResult r = epsilon_bound(params, f.delta, parse_mode(f.mode), f.d_max);
        epsilon = r.epsilon;
        d = r.d;
        c.set("delta", f.delta);
        c.set("mode", f.mode);
        warn_order(d, f.m, err);
    }
    add_globals(c, g);
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");

    const double proved = failure_bound(params, epsilon, f.d_max);
    const TailEstimate tail = mc_error_tail(params, epsilon, f.trials, g.seed);
    passed = tail.wilson_99_low <= proved;
    report.summary = {{"epsilon", epsilon},
                      {"d", d ? Cell(static_cast<std::int64_t>(d)) : Cell(std::monostate{})},
                      {"proved_failure", proved},
                      {"trials", tail.trials},
                      {"exceed", tail.exceed_count},
                      {"exceed_rate", tail.point_estimate},
                      {"wilson_99_low", tail.wilson_99_low},
                      {"wilson_99_high", tail.wilson_99_high},
                      {"passed", passed}};
    return report;
}

// bench

Report cmd_bench(const BenchFlags& f, const Globals& g) {
    Report report{RunConfig("bench"), {}, {}};
    auto& c = report.config;
    c.set("samples", static_cast<std::uint64_t>(f.samples));
    c.set("mode", f.mode);
    c.set("bins", static_cast<std::uint64_t>(f.bins));
    c.set("d_max", static_cast<std::int64_t>(f.d_max));
    c.set("raw", f.raw);
    add_globals(c, g);
    const EpsilonMode mode = parse_mode(f.mode);
    if (f.samples == 0) throw ArgumentError("--samples must be positive");
    if (f.bins == 0) throw ArgumentError("--bins must be positive");

    CounterRng rng(g.seed, 0xbe7c4);
    std::vector<double> latency_ms;
    latency_ms.reserve(f.samples);
    std::uint64_t p_clamped = 0, v_clamped = 0, any_clamped = 0;
    Table raw{"samples", {"n", "m", "s", "v", "delta", "d", "epsilon", "latency_ms"}, {}};
    for (std::size_t i = 0; i < f.samples; ++i) {
        const std::uint64_t n = 1000 + rng.below(1000000 - 1000 + 1);
        const auto m_lo = static_cast<std::uint64_t>(std::ceil(0.01 * static_cast<double>(n)));
        const std::uint64_t m = m_lo + rng.below(n - m_lo + 1);
        const std::uint64_t d_drawn = 2 + rng.below(29);
        double p = rng.uniform();
        double v = rng.uniform();

        bool clamped = false;
        if (p > 0.5) {
            p = 0.5;
            ++p_clamped;
            clamped = true;
        }
        const double v_floor = min_dispersion(n);
        if (v < v_floor) {
            v = v_floor;
            ++v_clamped;
            clamped = true;
        }
        if (clamped) ++any_clamped;
        const std::uint64_t s =
            std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(p * static_cast<double>(m))), 1, m / 2);
        const double delta = std::max(1e-13, std::exp(-static_cast<double>(d_drawn)));
        const BoundParams params = make_params(n, m, s, v);

        clear_moment_cache();
        const auto start = std::chrono::steady_clock::now();
        const EpsilonResult r = epsilon_bound(params, delta, mode, f.d_max);
        const auto stop = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        latency_ms.push_back(ms);
        if (f.raw) raw.rows.push_back({n, m, s, v, delta, static_cast<std::int64_t>(r.d), r.epsilon, ms});
    }

    std::vector<double> sorted = latency_ms;
    std::sort(sorted.begin(), sorted.end());
    double total = 0;
    for (double x : sorted) total += x;
    const double lo = sorted.front(), hi = sorted.back();
    const double width = (hi - lo) / static_cast<double>(f.bins);
    Table histogram{"histogram", {"lo_ms", "hi_ms", "count"}, {}};
    std::vector<std::uint64_t> counts(f.bins, 0);
    for (double x : sorted) {
        std::size_t b = width > 0 ? static_cast<std::size_t>((x - lo) / width) : 0;
        counts[std::min(b, f.bins - 1)]++;
    }
    for (std::size_t b = 0; b < f.bins; ++b) {
        const double a = lo + width * static_cast<double>(b);
        histogram.rows.push_back({a, b + 1 == f.bins ? hi : a + width, counts[b]});
    }

    const auto n = static_cast<double>(f.samples);
    report.summary = {{"samples", static_cast<std::uint64_t>(f.samples)},
                      {"median_ms", quantile_sorted(sorted, 0.5)},
                      {"mean_ms", total / n},
                      {"p90_ms", quantile_sorted(sorted, 0.9)},
                      {"p99_ms", quantile_sorted(sorted, 0.99)},
                      {"max_ms", hi},
                      {"p_clamp_rate", static_cast<double>(p_clamped) / n},
                      {"v_clamp_rate", static_cast<double>(v_clamped) / n},
                      {"clamp_rate", static_cast<double>(any_clamped) / n}};
    report.tables.push_back(std::move(histogram));
    if (f.raw) report.tables.push_back(std::move(raw));
    return report;
}

void add_data_flags(CLI::App* cmd, DataFlags& f) {
    cmd->add_option("--input", f.input, "Dataset path")->required();
    cmd->add_option("--data-format", f.data_format, "csv or mtx")->capture_default_str();
    cmd->add_flag("--header", f.header, "CSV has a header line");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Explicit distortion guarantees for sparse random embeddings", "sjl"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", "sjl 1.0.0");

    Globals g;
    std::optional<int> threads_flag;
    app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--threads", threads_flag, "Thread cap (default: SJL_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "Output format: csv, json or pretty")
        ->check(CLI::IsMember({"csv", "json", "pretty"}));
    app.add_option("--output", g.output, "Write results to this file instead of stdout");

    BoundFlags bound;
    auto* bound_cmd = app.add_subcommand("bound", "Distortion guaranteed with probability 1 - delta");
    bound_cmd->add_option("--n", bound.n, "Ambient dimension")->required();
    bound_cmd->add_option("--m", bound.m, "Embedding dimension")->required();
    bound_cmd->add_option("--s", bound.s, "Column sparsity")->required();
    bound_cmd->add_option("--v", bound.v, "Dispersion |x|_inf/|x|_2")->required();
    bound_cmd->add_option("--delta", bound.delta, "Failure probability")->required();
    bound_cmd->add_option("--mode", bound.mode, "corollary or optimized")
        ->check(CLI::IsMember({"corollary", "optimized"}))
        ->capture_default_str();
    bound_cmd->add_option("--d-max", bound.d_max, "Largest moment order in optimized mode")->capture_default_str();

    CurveFlags curve;
    auto* curves_cmd = app.add_subcommand("curves", "Curves of the new bound next to the baseline");
    curves_cmd->require_subcommand(1);
    curves_cmd->add_option("--n", curve.n, "Ambient dimension")->capture_default_str();
    curves_cmd->add_option("--v", curve.v, "Dispersion")->capture_default_str();
    curves_cmd->add_option("--d-max", curve.d_max, "Largest moment order")->capture_default_str();
    curves_cmd->add_option("--eps-min", curve.eps_min, "Smallest distortion")->capture_default_str();
    curves_cmd->add_option("--eps-max", curve.eps_max, "Largest distortion")->capture_default_str();
    curves_cmd->add_option("--points", curve.points, "Grid points (0 gives an empty table)")->capture_default_str();
    curves_cmd->add_option("--spacing", curve.spacing, "lin or log distortion grid")->capture_default_str();
    auto* c_conf = curves_cmd->add_subcommand("confidence", "Proved confidence vs. distortion");
    c_conf->add_option("--m", curve.m, "Embedding dimension (default n/10)");
    c_conf->add_option("--s", curve.s, "Sparsity (default m/100)");
    auto* c_sparse = curves_cmd->add_subcommand("sparsity", "Least sparsity vs. distortion");
    c_sparse->add_option("--m", curve.m, "Embedding dimension (default n/10)");
    c_sparse->add_option("--confidence", curve.confidence, "Target confidence")->capture_default_str();
    auto* c_dim = curves_cmd->add_subcommand("dimension", "Least dimension vs. distortion");
    c_dim->add_option("--s", curve.s, "Fixed sparsity (overrides --s-ratio)");
    c_dim->add_option("--s-ratio", curve.s_ratio, "Sparsity as a fraction of m")->capture_default_str();
    c_dim->add_option("--confidence", curve.confidence, "Target confidence")->capture_default_str();
    auto* c_union = curves_cmd->add_subcommand("union", "Least dimension vs. number of pairs");
    c_union->add_option("--s", curve.s, "Fixed sparsity (overrides --s-ratio)");
    c_union->add_option("--s-ratio", curve.s_ratio, "Sparsity as a fraction of m")->capture_default_str();
    c_union->add_option("--confidence", curve.confidence, "Target joint confidence")->capture_default_str();
    c_union->add_option("--epsilon", curve.epsilon, "Distortion")->capture_default_str();
    c_union->add_option("--pairs-min", curve.pairs_min, "Fewest pairs")->capture_default_str();
    c_union->add_option("--pairs-max", curve.pairs_max, "Most pairs")->capture_default_str();

    RatioFlags ratio;
    auto* ratio_cmd = app.add_subcommand("ratio-grid", "Row bound ratio new/baseline over a (d, p, v) grid");
    ratio_cmd->add_option("--n", ratio.n, "Ambient dimension")->capture_default_str();
    ratio_cmd->add_option("--p-min", ratio.p_min)->capture_default_str();
    ratio_cmd->add_option("--p-max", ratio.p_max)->capture_default_str();
    ratio_cmd->add_option("--p-points", ratio.p_points, "Log-spaced p values")->capture_default_str();
    ratio_cmd->add_option("--v-min", ratio.v_min)->capture_default_str();
    ratio_cmd->add_option("--v-max", ratio.v_max)->capture_default_str();
    ratio_cmd->add_option("--v-points", ratio.v_points, "Log-spaced v values")->capture_default_str();
    ratio_cmd->add_option("--d-min", ratio.d_min)->capture_default_str();
    ratio_cmd->add_option("--d-max", ratio.d_max)->capture_default_str();
    ratio_cmd->add_option("--d-step", ratio.d_step, "Odd orders are interpolated")->capture_default_str();

    DataFlags data;
    DisperseFlags disperse;
    auto* disperse_cmd = app.add_subcommand("disperse", "Dispersion profile of pairwise differences");
    add_data_flags(disperse_cmd, data);
    disperse_cmd->add_option("--subsample", disperse.subsample, "Rows sampled before pairing")->capture_default_str();
    disperse_cmd->add_flag("--values", disperse.values, "Also emit every pair's v");

    ProjectFlags project;
    auto* project_cmd = app.add_subcommand("project", "Sample or load an embedding and apply it to a dataset");
    add_data_flags(project_cmd, data);
    project_cmd->add_option("--m", project.m, "Embedding dimension");
    project_cmd->add_option("--s", project.s, "Column sparsity")->capture_default_str();
    project_cmd->add_option("--variant", project.variant, "column-wor, row-wor or with-replacement")
        ->capture_default_str();
    project_cmd->add_option("--embedding-in", project.embedding_in, "Reuse an embedding record");
    project_cmd->add_option("--embedding-out", project.embedding_out, "Save the embedding record");

    DistortionFlags distortion;
    auto* distortion_cmd = app.add_subcommand("distortion", "Empirical distortion on data next to the proved bound");
    add_data_flags(distortion_cmd, data);
    distortion_cmd->add_option("--m", distortion.m, "Embedding dimension")->required();
    distortion_cmd->add_option("--s", distortion.s, "Column sparsity")->capture_default_str();
    distortion_cmd->add_option("--pairs", distortion.pairs, "Sampled pairs")->capture_default_str();
    distortion_cmd->add_option("--seeds", distortion.seeds, "Embeddings per pair")->capture_default_str();
    distortion_cmd->add_option("--eps-min", distortion.eps_min)->capture_default_str();
    distortion_cmd->add_option("--eps-max", distortion.eps_max)->capture_default_str();
    distortion_cmd->add_option("--points", distortion.points)->capture_default_str();
    distortion_cmd->add_option("--d-max", distortion.d_max)->capture_default_str();

    ExactFlags exact;
    McFlags mc;
    auto* verify_cmd = app.add_subcommand("verify", "Check the bounds against exact or Monte-Carlo oracles");
    verify_cmd->require_subcommand(1);
    auto* v_exact = verify_cmd->add_subcommand("exact", "Exhaustive enumeration at small n");
    v_exact->add_option("--n-max", exact.n_max)->capture_default_str();
    v_exact->add_option("--d-max", exact.d_max)->capture_default_str();
    v_exact->add_option("--p", exact.p, "Rational p values, e.g. 1/4")->delimiter(',');
    v_exact->add_option("--vectors", exact.vectors, "Random vectors per case")->capture_default_str();
    v_exact->add_option("--pairs", exact.pairs, "Majorization pairs per case")->capture_default_str();
    auto* v_mc = verify_cmd->add_subcommand("mc", "Monte-Carlo tail at the worst-case vector");
    v_mc->add_option("--n", mc.n)->required();
    v_mc->add_option("--m", mc.m)->required();
    v_mc->add_option("--s", mc.s)->required();
    v_mc->add_option("--v", mc.v)->required();
    v_mc->add_option("--delta", mc.delta)->capture_default_str();
    v_mc->add_option("--epsilon", mc.epsilon, "Distortion (default: the proved one at --delta)");
    v_mc->add_option("--trials", mc.trials)->capture_default_str();
    v_mc->add_option("--mode", mc.mode)->check(CLI::IsMember({"corollary", "optimized"}))->capture_default_str();
    v_mc->add_option("--d-max", mc.d_max)->capture_default_str();

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Latency of epsilon_bound over randomly sampled parameters");
    bench_cmd->add_option("--samples", bench.samples)->capture_default_str();
    bench_cmd->add_option("--mode", bench.mode)->check(CLI::IsMember({"corollary", "optimized"}))->capture_default_str();
    bench_cmd->add_option("--bins", bench.bins)->capture_default_str();
    bench_cmd->add_option("--d-max", bench.d_max)->capture_default_str();
    bench_cmd->add_flag("--raw", bench.raw, "Also emit every sample");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    const int threads = threads_flag.value_or(thread_count_from_env());
    set_thread_count(threads);

    const bool tabular = curves_cmd->parsed() || ratio_cmd->parsed() || project_cmd->parsed() || distortion_cmd->parsed();
    if (g.format.empty()) g.format = tabular ? "csv" : "pretty";

    bool passed = true;
    try {
        Report report{RunConfig(""), {}, {}};
        if (bound_cmd->parsed()) {
            report = cmd_bound(bound, g, err);
        } else if (c_conf->parsed()) {
            report = curves_confidence(curve, g, err);
        } else if (c_sparse->parsed()) {
            report = curves_sparsity(curve, g);
        } else if (c_dim->parsed()) {
            report = curves_dimension(curve, g);
        } else if (c_union->parsed()) {
            report = curves_union(curve, g);
        } else if (ratio_cmd->parsed()) {
            report = cmd_ratio_grid(ratio, g);
        } else if (disperse_cmd->parsed()) {
            report = cmd_disperse(data, disperse, g);
        } else if (project_cmd->parsed()) {
            report = cmd_project(data, project, g);
        } else if (distortion_cmd->parsed()) {
            report = cmd_distortion(data, distortion, g);
        } else if (v_exact->parsed()) {
            report = cmd_verify_exact(exact, g, passed);
        } else if (v_mc->parsed()) {
            report = cmd_verify_mc(mc, g, err, passed);
        } else if (bench_cmd->parsed()) {
            report = cmd_bench(bench, g);
        }

        const OutputFormat format = parse_output_format(g.format);
        if (g.output.empty()) {
            render(report, format, out);
        } else {
            std::ofstream file(g.output);
            if (!file) throw ArgumentError("cannot open output file '" + g.output + "'");
            render(report, format, file);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!passed) {
        err << "verification failed\n";
        return kExitVerificationFailed;
    }
    return kExitSuccess;
}

}  // namespace sjl::cli
