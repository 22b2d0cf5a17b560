#include "kp/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kp/errors.hpp"

namespace kp::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Table parse(const std::string& text, const std::string& origin_name) {
    Table table;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        for (std::string& c : cells) c = strip(c);
        if (table.header.empty()) {
            table.header = cells;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError(origin_name + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(table.header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw DataError(origin_name + ": empty file");
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

double parse_double(const std::string& cell, const std::string& context) {
    if (cell.empty()) throw DataError(context + ": empty numeric cell");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE) {
        throw DataError(context + ": not a number: '" + cell + "'");
    }
    return v;
}

long long parse_integer(const std::string& cell, const std::string& context) {
    if (cell.empty()) throw DataError(context + ": empty integer cell");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(cell.c_str(), &end, 10);
    if (end != cell.c_str() + cell.size() || errno == ERANGE) {
        throw DataError(context + ": not an integer: '" + cell + "'");
    }
    return v;
}

}  // namespace kp::csv
