#pragma once

// Minimal CSV helpers shared by the trajectory and environment readers.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "vbnet/errors.hpp"

namespace vbnet::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws IngestionError naming the column.
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw IngestionError("missing column '" + name + "'", 0);
    }
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string(), 0);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty file " + path.string(), 0);
    t.header = split(line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw IngestionError("expected " + std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(cells.size()),
                                 row);
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IngestionError("column '" + col + "': cannot parse '" + s + "'", row);
    }
    return v;
}

inline long long parse_int(const std::string& s, std::size_t row, const std::string& col) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IngestionError("column '" + col + "': cannot parse '" + s + "'", row);
    }
    return v;
}

}  // namespace vbnet::csv
