#include "dynamap/csv.hpp"

#include <charconv>
#include <fstream>

#include "dynamap/errors.hpp"
#include "dynamap/strutil.hpp"

namespace dynamap {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw ValidationError(path + ": missing column '" + name + "'");
    return c;
}

const std::string& CsvTable::cell(size_t row, int col) const {
    return rows[row][static_cast<size_t>(col)];
}

void CsvTable::fail(size_t row, const std::string& msg) const {
    throw ValidationError(path + ":" + std::to_string(line_no[row]) + ": " + msg);
}

double CsvTable::number(size_t row, int col) const {
    const std::string& s = rows[row][static_cast<size_t>(col)];
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(row, "column '" + header[static_cast<size_t>(col)] + "': not a number: '" + s + "'");
    return value;
}

long long CsvTable::integer(size_t row, int col) const {
    const std::string& s = rows[row][static_cast<size_t>(col)];
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(row, "column '" + header[static_cast<size_t>(col)] + "': not an integer: '" + s + "'");
    return value;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");

    CsvTable table;
    table.path = path;
    std::string line;
    int lineno = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split(line, ',');
        for (auto& f : fields) f = trim(f);
        if (table.header.empty()) {
            table.header = std::move(fields);
            width = table.header.size();
            continue;
        }
        if (fields.size() != width)
            throw ValidationError(strprintf("%s:%d: expected %zu fields, got %zu", path.c_str(),
                                            lineno, width, fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_no.push_back(lineno);
    }
    if (table.header.empty()) throw ValidationError(path + ": missing header row");
    return table;
}

}  // namespace dynamap
