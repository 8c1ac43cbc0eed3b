#pragma once

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sjl::cli {

enum class OutputFormat { Csv, Json, Pretty };

OutputFormat parse_output_format(const std::string& name);

using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string, bool>;

// Shortest text that round-trips to the same double; stable across runs.
std::string format_double(double x);
std::string format_cell(const Cell& cell);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Resolved configuration of one run, echoed at the top of every output.
class RunConfig {
public:
    explicit RunConfig(std::string command) : command_(std::move(command)) {}

    void set(const std::string& key, Cell value) { entries_.emplace_back(key, std::move(value)); }
    const std::string& command() const { return command_; }
    const std::vector<std::pair<std::string, Cell>>& entries() const { return entries_; }

private:
    std::string command_;
    std::vector<std::pair<std::string, Cell>> entries_;
};

inline constexpr int kOutputSchemaVersion = 1;

struct Report {
    RunConfig config;
    std::vector<std::pair<std::string, Cell>> summary;
    std::vector<Table> tables;
};

void render(const Report& report, OutputFormat format, std::ostream& out);

nlohmann::ordered_json to_json(const Cell& cell);

}  // namespace sjl::cli
