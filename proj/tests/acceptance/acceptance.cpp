// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include "cli.hpp"
#include "json.hpp"

#include "sjl/embedding.hpp"
#include "sjl/moment_engine.hpp"
#include "sjl/oracle.hpp"
#include "sjl/row_bound.hpp"
#include "sjl/tail_bounds.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace sjl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& criterion) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = criterion();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("criterion %2d %s  %s: %s (%.1fs)\n", id, o.passed ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
}

void info(int id, const std::string& text) {
    std::printf("criterion %2d INFO  %s\n", id, text.c_str());
    std::fflush(stdout);
}

std::string describe(const CheckReport& r) {
    std::ostringstream s;
    s << r.cases << " cases, " << r.violations << " violations, worst margin " << r.worst_margin;
    if (!r.first_violation.empty()) s << ", first: " << r.first_violation;
    return s.str();
}

std::vector<double> log_space(double lo, double hi, std::size_t points) {
    std::vector<double> out;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    return out;
}

struct CliResult {
    int code = 0;
    std::string out;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str()};
}

ExactGrid desk_grid() {
    ExactGrid grid;
    grid.n_max = 6;
    grid.d_max = 6;
    grid.p_values = {make_rational(1, 4), make_rational(1, 2)};
    grid.vectors_per_case = 20;
    grid.majorization_pairs = 200;
    return grid;
}

Outcome exact_moment_equivalence() {
    const auto start = Clock::now();
    const std::vector<Rational> ps{make_rational(1, 8), make_rational(1, 4), make_rational(1, 2)};
    const auto r = check_moment_equivalence(8, ps, 8);
    const double elapsed = seconds_since(start);
    return {r.passed() && elapsed < 30.0, describe(r) + ", " + std::to_string(elapsed) + "s of 30s"};
}

Outcome d2_closed_forms() {
    std::size_t points = 0;
    double worst_t = 0, worst_q = 0;
    for (std::uint64_t n : {2ull, 10ull, 1000ull, 100000ull, 10000000ull}) {
        for (auto [s, m] : {std::pair<std::uint64_t, std::uint64_t>{1, 2}, {1, 3}, {3, 100}, {7, 1000000}}) {
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const double v_lo = min_dispersion(n);
                const double v = std::min(1.0, v_lo + t * (1.0 - v_lo));
                const auto params = make_params(n, m, s, v);
                const double p = static_cast<double>(s) / static_cast<double>(m);
                const double tb = row_moment_bound(params, 2);
                worst_t = std::max(worst_t, std::abs(tb - 4 * p) / (4 * p));
                const double q = aggregate_bound(params, 2).q;
                const double q_ref = 4 * p / std::sqrt(std::expm1(1.0 / static_cast<double>(m)));
                worst_q = std::max(worst_q, std::abs(q - q_ref) / q_ref);
                ++points;
            }
        }
    }
    std::ostringstream s;
    s << points << " points, max rel error T " << worst_t << " (tol 1e-12), Q " << worst_q << " (tol 1e-9)";
    return {points == 100 && worst_t <= 1e-12 && worst_q <= 1e-9, s.str()};
}

Outcome row_bound_soundness() {
    const auto r = check_row_bound_soundness(desk_grid());
    return {r.passed(), describe(r)};
}

Outcome chaos_inequality() {
    const auto r = check_chaos_inequality(desk_grid(), 50);
    return {r.passed(), describe(r)};
}

Outcome majorization() {
    const auto grid = desk_grid();
    const auto order = check_majorization_ordering(grid);
    const auto attain = check_worst_case_attainment(grid);
    return {order.passed() && attain.passed(), "ordering: " + describe(order) + "; x* maximal: " + describe(attain)};
}

void majorization_by_p() {
    for (const auto& p : {make_rational(1, 4), make_rational(1, 3), make_rational(1, 2)}) {
        auto grid = desk_grid();
        grid.p_values = {p};
        const auto order = check_majorization_ordering(grid);
        const auto attain = check_worst_case_attainment(grid);
        info(5, "p = " + to_string(p) + ": ordering " + std::to_string(order.violations) + "/" +
                    std::to_string(order.cases) + " violations, x* maximal " + std::to_string(attain.violations) +
                    "/" + std::to_string(attain.cases) + " violations");
    }
    info(5, "E S^4 = 3p^2 + (p - 3p^2) sum x_i^4, so the ordering reverses for every p < 1/3");
}

Outcome monte_carlo_end_to_end() {
    const auto start = Clock::now();
    const double delta = 0.25;
    bool ok = true;
    std::ostringstream s;
    for (double v : {0.05, 0.2}) {
        const auto params = make_params(10000, 1000, 10, v);
        const auto eps = epsilon_bound(params, delta, EpsilonMode::Optimized);
        if (eps.d > static_cast<int>(params.m / 2)) ok = false;
        const auto tail = mc_error_tail(params, eps.epsilon, 100000, 20240 + static_cast<std::uint64_t>(v * 100));
        ok = ok && tail.wilson_99_high <= delta;
        s << "v=" << v << " eps=" << eps.epsilon << " d=" << eps.d << " exceed " << tail.exceed_count << "/"
          << tail.trials << " wilson_high=" << tail.wilson_99_high << "; ";
    }
    const double elapsed = seconds_since(start);
    s << elapsed << "s of 600s";
    return {ok && elapsed < 600.0, s.str()};
}

Outcome baseline_dominance() {
    const std::uint64_t n = 10000;
    const auto p_grid = log_space(1e-3, 0.5, 24);
    const auto v_grid = log_space(1e-2, 1.0, 24);
    std::vector<double> d_grid;
    for (int d = 2; d <= 32; d += 2) d_grid.push_back(d);
    const auto rows = ratio_grid(n, p_grid, v_grid, d_grid);
    double lo = INFINITY, hi = 0;
    std::size_t cells = 0;
    for (const auto& r : rows) {
        if (!r.supported) continue;
        ++cells;
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    std::ostringstream s;
    s << cells << " cells, ratio in [" << lo << ", " << hi << "]";
    return {cells == rows.size() && hi <= 1.0 && lo <= 0.1, s.str()};
}

Outcome bench_latency() {
    const auto r = cli({"bench", "--samples", "1000", "--format", "json"});
    if (r.code != 0) return {false, "bench exited with " + std::to_string(r.code)};
    const auto doc = nlohmann::json::parse(r.out);
    const double median = doc["summary"]["median_ms"].get<double>();
    std::ostringstream s;
    s << "corollary mode, 1000 samples, median " << median << " ms, p99 " << doc["summary"]["p99_ms"].get<double>()
      << " ms (limit 10 ms)";
    return {median <= 10.0, s.str()};
}

Outcome degenerate_exactness() {
    std::uint64_t checked = 0, nonzero = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const std::uint64_t n = 200, m = 50, s = 1 + k % 25;
        const auto e = SparseEmbedding::sample(n, m, s, SamplingVariant::ColumnWithoutReplacement, derive_seed(99, k));
        std::vector<double> x(n, 0.0);
        for (std::uint64_t i = 0; i < n; ++i) {
            x[i] = 1.0;
            if (e.distortion(x) != 0.0) ++nonzero;
            x[i] = 0.0;
            ++checked;
        }
    }
    return {nonzero == 0, std::to_string(checked) + " (embedding, e_i) pairs, " + std::to_string(nonzero) + " nonzero"};
}

Outcome dataset_and_curves() {
    // a synthetic dataset stands in for user data
    const auto path = std::filesystem::temp_directory_path() / "sjl_acceptance_data.csv";
    const std::size_t dim = 40;
    {
        std::ofstream out(path);
        CounterRng rng(10, 0);
        for (int r = 0; r < 300; ++r) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double x = rng.below(3) == 0 ? 0.0 : std::round(rng.uniform() * 1000) / 100;
                out << (j ? "," : "") << x;
            }
            out << '\n';
        }
    }
    const std::vector<std::string> args{"disperse", "--input", path.string(), "--values", "--format", "json",
                                        "--seed", "5"};
    const auto first = cli(args);
    const auto second = cli(args);
    std::filesystem::remove(path);
    if (first.code != 0) return {false, "disperse exited with " + std::to_string(first.code)};
    const auto doc = nlohmann::json::parse(first.out);
    const double floor = 1.0 / std::sqrt(static_cast<double>(dim));
    std::size_t values = 0, outside = 0;
    for (const auto& table : doc["tables"]) {
        if (table["name"] != "values") continue;
        for (const auto& row : table["rows"]) {
            const double v = row.back().get<double>();
            ++values;
            if (v < floor - 1e-15 || v > 1.0) ++outside;
        }
    }
    const bool reproducible = first.out == second.out;

    const std::vector<std::pair<std::string, std::string>> families{{"confidence", "epsilon,new,baseline,ratio"},
                                                                    {"sparsity", "epsilon,new,baseline,ratio"},
                                                                    {"dimension", "epsilon,new,baseline,ratio"},
                                                                    {"union", "pairs,new,baseline,ratio"}};
    std::size_t good_families = 0;
    for (const auto& [family, header] : families) {
        const auto r = cli({"curves", family, "--points", "5"});
        std::istringstream in(r.out);
        std::size_t data_rows = 0;
        bool header_ok = false;
        for (std::string line; std::getline(in, line);) {
            if (line.empty() || line[0] == '#') continue;
            if (!header_ok) {
                header_ok = line == header;
                continue;
            }
            ++data_rows;
        }
        if (r.code == 0 && header_ok && data_rows == 5) ++good_families;
    }
    std::ostringstream s;
    s << values << " dispersion values, " << outside << " outside [1/sqrt(n), 1], reproducible "
      << (reproducible ? "yes" : "no") << ", curve families " << good_families << "/4";
    return {values > 0 && outside == 0 && reproducible && good_families == 4, s.str()};
}

}  // namespace

int main() {
    report(1, "exact moment equivalence", exact_moment_equivalence);
    report(2, "d=2 closed forms", d2_closed_forms);
    report(3, "row bound soundness (desk scale)", row_bound_soundness);
    report(4, "chaos inequality (desk scale)", chaos_inequality);
    report(5, "majorization ordering and x* maximality", majorization);
    majorization_by_p();
    report(6, "end-to-end Monte Carlo", monte_carlo_end_to_end);
    report(7, "dominance over baseline", baseline_dominance);
    report(8, "epsilon_bound latency", bench_latency);
    report(9, "one-hot inputs are preserved exactly", degenerate_exactness);
    report(10, "dispersion profile and curve families", dataset_and_curves);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
