#pragma once

#include <string>
#include <vector>

#include "refute/data.hpp"
#include "refute/dilation.hpp"

namespace refute {

// Header plus string cells; blank lines are skipped, fields are trimmed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based file line of each row
    int column(const std::string& name) const;  // -1 if absent
};

// DataError on unreadable, empty or header-only files and ragged rows.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// Columns y, d, z (any order, extra columns ignored); d and z must be 0 or 1.
Sample sample_from_csv(const CsvTable& t);
Sample load_sample_csv(const std::string& path);

// Columns y_l, y_u.
IntervalSample intervals_from_csv(const CsvTable& t);
IntervalSample load_interval_csv(const std::string& path);

void write_sample_csv(const Sample& s, const std::string& path);

json read_json_file(const std::string& path);

}  // namespace refute
