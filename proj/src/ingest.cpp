#include "corrnet/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace corrnet {

namespace {

std::vector<std::string> split_fields(const std::string& line, bool comma) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    if (comma) {
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::size_t end = next == std::string::npos ? line.size() : next;
            std::size_t a = pos, b = end;
            while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
            while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) --b;
            fields.push_back(line.substr(a, b - a));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
    } else {
        while (pos < line.size()) {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
                ++pos;
            if (pos == line.size()) break;
            std::size_t end = pos;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])))
                ++end;
            fields.push_back(line.substr(pos, end - pos));
            pos = end;
        }
    }
    return fields;
}

double parse_cell(const std::string& token, int row, int col) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error("non-numeric cell '" + token + "' at row " +
                                 std::to_string(row) + ", column " + std::to_string(col));
    if (!std::isfinite(value))
        throw std::runtime_error("non-finite value at row " + std::to_string(row) +
                                 ", column " + std::to_string(col));
    return value;
}

}  // namespace

ExternalMatrix load_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());

    std::vector<std::vector<double>> rows;
    bool comma = false;
    bool delimiter_known = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (!delimiter_known) {
            comma = line.find(',') != std::string::npos;
            delimiter_known = true;
        }
        const int row_number = static_cast<int>(rows.size()) + 1;
        const auto fields = split_fields(line, comma);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_cell(fields[c], row_number, static_cast<int>(c) + 1));
        if (!rows.empty() && row.size() != rows[0].size())
            throw std::runtime_error("ragged row " + std::to_string(row_number) + ": has " +
                                     std::to_string(row.size()) + " fields, row 1 has " +
                                     std::to_string(rows[0].size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty matrix file: " + path.string());

    ExternalMatrix m;
    m.provenance = path.string();
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    char buf[40];
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
            out << buf << (c + 1 == values.cols() ? '\n' : ',');
        }
    }
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

}  // namespace corrnet
