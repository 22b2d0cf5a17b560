#pragma once

#include <string>
#include <vector>

namespace kp::csv {

// Minimal CSV support for the instance/distribution schemas: UTF-8,
// comma-separated, '.' decimal point, no quoting, no thousands separators.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // each row has header.size() cells
};

Table read_file(const std::string& path);
Table parse(const std::string& text, const std::string& origin_name);

// Cell parsers. `context` names the cell in error messages ("origins.csv row 3,
// column population"). Both reject trailing garbage.
double parse_double(const std::string& cell, const std::string& context);
long long parse_integer(const std::string& cell, const std::string& context);

}  // namespace kp::csv
