#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kvlif/errors.hpp"
#include "kvlif/io_util.hpp"

// Minimal CSV assembly: header row mandatory, every row newline-terminated,
// doubles in shortest round-trip form with '.' separators. Cells are plain
// (no quoting) so embedded delimiters are rejected outright.

namespace kvlif {

inline std::string csv_cell(double v) { return format_double(v); }
inline std::string csv_cell(std::size_t v) { return std::to_string(v); }
inline std::string csv_cell(int v) { return std::to_string(v); }
inline std::string csv_cell(const std::string& s) { return s; }

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    explicit CsvTable(std::vector<std::string> cols) : header(std::move(cols)) {
        if (header.empty()) throw IoError("csv: header row must not be empty");
        for (const auto& c : header) check_cell(c);
    }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header.size())
            throw IoError("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header.size()));
        for (const auto& c : cells) check_cell(c);
        rows.push_back(std::move(cells));
    }

    std::string str() const {
        std::string out;
        append_line(out, header);
        for (const auto& r : rows) append_line(out, r);
        return out;
    }

private:
    static void check_cell(const std::string& c) {
        if (c.find_first_of(",\n\r\"") != std::string::npos)
            throw IoError("csv: cell '" + c + "' contains a delimiter or quote");
    }

    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }
};

} // namespace kvlif
