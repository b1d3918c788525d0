#pragma once

#include <string>
#include <vector>

namespace dynamap {

// In-memory CSV table. Header row is mandatory; data rows keep their
// 1-based source line number for error messages.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_no;

    // Index of a header column, or -1.
    int column(const std::string& name) const;
    // Same, but missing column is a ValidationError.
    int require(const std::string& name) const;

    const std::string& cell(size_t row, int col) const;
    double number(size_t row, int col) const;
    long long integer(size_t row, int col) const;

    [[noreturn]] void fail(size_t row, const std::string& msg) const;
};

// Reads a whole CSV file. No quoting rules: fields never contain commas.
CsvTable read_csv(const std::string& path);

}  // namespace dynamap
