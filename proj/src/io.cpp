#include "refute/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "refute/errors.hpp"

namespace refute {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double number(const CsvTable& t, std::size_t row, int col) {
    const std::string& cell = t.rows[row][static_cast<std::size_t>(col)];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError("row " + std::to_string(row + 1) + " (line " + std::to_string(t.lines[row]) + "): column '" +
                        t.header[static_cast<std::size_t>(col)] + "' is not a number: '" + cell + "'");
    return v;
}

int binary(const CsvTable& t, std::size_t row, int col) {
    double v = number(t, row, col);
    if (v != 0.0 && v != 1.0)
        throw DataError("row " + std::to_string(row + 1) + " (line " + std::to_string(t.lines[row]) + "): column '" +
                        t.header[static_cast<std::size_t>(col)] + "' must be 0 or 1, got " + t.rows[row][static_cast<std::size_t>(col)]);
    return static_cast<int>(v);
}

int require(const CsvTable& t, const std::string& name) {
    int c = t.column(name);
    if (c < 0) throw DataError("missing header column '" + name + "'");
    return c;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(ss, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            t.header = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError("row " + std::to_string(t.rows.size() + 1) + " (line " + std::to_string(lineno) + "): expected " +
                            std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lineno);
    }
    if (!have_header) throw DataError("empty file: no header");
    if (t.rows.empty()) throw DataError("no data rows after the header");
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

Sample sample_from_csv(const CsvTable& t) {
    int cy = require(t, "y"), cd = require(t, "d"), cz = require(t, "z");
    Sample s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        s.y.push_back(number(t, r, cy));
        s.d.push_back(binary(t, r, cd));
        s.z.push_back(binary(t, r, cz));
    }
    s.validate();
    return s;
}

Sample load_sample_csv(const std::string& path) { return sample_from_csv(read_csv(path)); }

IntervalSample intervals_from_csv(const CsvTable& t) {
    int cl = require(t, "y_l"), cu = require(t, "y_u");
    IntervalSample s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        s.yl.push_back(number(t, r, cl));
        s.yu.push_back(number(t, r, cu));
        if (s.yl.back() > s.yu.back())
            throw DataError("row " + std::to_string(r + 1) + " (line " + std::to_string(t.lines[r]) + "): y_l exceeds y_u");
    }
    return s;
}

IntervalSample load_interval_csv(const std::string& path) { return intervals_from_csv(read_csv(path)); }

void write_sample_csv(const Sample& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    out << "y,d,z\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << s.y[i] << ',' << s.d[i] << ',' << s.z[i] << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

}  // namespace refute
