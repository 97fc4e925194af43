#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lspart::cli {

/// Malformed input; the CLI exits with status 2.
class InputFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Comma-separated table with a mandatory header row.
class CsvTable {
public:
    static CsvTable read(const std::string& path);
    static CsvTable parse(std::string_view text, const std::string& source);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return cells_.size(); }
    std::size_t column(const std::string& name) const;  // throws InputFailure naming the column
    const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }

    /// Numeric column; empty, NA or unparsable cells are rejected with row/column position.
    std::vector<double> numeric(const std::string& name) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> cells_;
};

/// Shortest text that parses back to exactly `value` (at most 17 significant digits).
std::string format_double(double value);

/// Writes `contents` to a temporary sibling file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

std::vector<std::string> split(std::string_view text, char sep);

} // namespace lspart::cli
