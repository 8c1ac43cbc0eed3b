#include "output.hpp"

#include "sjl/errors.hpp"

#include <cmath>
#include <charconv>
#include <iomanip>
#include <ostream>

namespace sjl::cli {

OutputFormat parse_output_format(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    if (name == "pretty") return OutputFormat::Pretty;
    throw ArgumentError("unknown output format '" + name + "' (expected csv, json or pretty)");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, result.ptr);
}

std::string format_cell(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "NA";
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return std::to_string(v);
            }
        },
        cell);
}

nlohmann::ordered_json to_json(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(v)) return v;
                return format_double(v);
            } else {
                return v;
            }
        },
        cell);
}

namespace {

void render_csv(const Report& report, std::ostream& out) {
    out << "# sjl " << report.config.command() << "\n";
    for (const auto& [key, value] : report.config.entries()) out << "# " << key << "=" << format_cell(value) << "\n";
    for (const auto& [key, value] : report.summary) out << "# result." << key << "=" << format_cell(value) << "\n";
    for (const auto& table : report.tables) {
        if (report.tables.size() > 1) out << "# table=" << table.name << "\n";
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
            out << "\n";
        }
    }
}

void render_json(const Report& report, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["schema"] = "sjl-output";
    doc["version"] = kOutputSchemaVersion;
    doc["command"] = report.config.command();
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.config.entries()) config[key] = to_json(value);
    doc["config"] = config;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& [key, value] : report.summary) summary[key] = to_json(value);
    doc["summary"] = summary;
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const auto& table : report.tables) {
        nlohmann::ordered_json t;
        t["name"] = table.name;
        t["columns"] = table.columns;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            nlohmann::ordered_json r = nlohmann::ordered_json::array();
            for (const auto& cell : row) r.push_back(to_json(cell));
            rows.push_back(r);
        }
        t["rows"] = rows;
        tables.push_back(t);
    }
    doc["tables"] = tables;
    out << doc.dump(2) << "\n";
}

void render_pretty(const Report& report, std::ostream& out) {
    out << "sjl " << report.config.command() << "\n";
    for (const auto& [key, value] : report.config.entries()) {
        out << "  " << std::left << std::setw(18) << key << format_cell(value) << "\n";
    }
    if (!report.summary.empty()) out << "\n";
    for (const auto& [key, value] : report.summary) {
        out << std::left << std::setw(20) << key << format_cell(value) << "\n";
    }
    for (const auto& table : report.tables) {
        out << "\n[" << table.name << "]\n";
        std::vector<std::size_t> width(table.columns.size());
        for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], format_cell(row[c]).size());
        }
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << std::setw(static_cast<int>(width[c] + 2)) << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << std::setw(static_cast<int>(width[c] + 2)) << format_cell(row[c]);
            out << "\n";
        }
    }
}

}  // namespace

void render(const Report& report, OutputFormat format, std::ostream& out) {
    switch (format) {
        case OutputFormat::Csv:
            render_csv(report, out);
            break;
        case OutputFormat::Json:
            render_json(report, out);
            break;
        case OutputFormat::Pretty:
            render_pretty(report, out);
            break;
    }
}

}  // namespace sjl::cli
