#include "specmix/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "specmix/errors.hpp"

namespace specmix {

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw NumericalError("failed to format double");
    }
    return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

bool parse_cell(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    // Tolerate surrounding whitespace from hand-edited files.
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

void write_csv(const std::string& path, const Eigen::MatrixXd& matrix,
               const std::vector<std::string>& header) {
    if (!header.empty() &&
        static_cast<Eigen::Index>(header.size()) != matrix.cols()) {
        throw DimensionError("header width does not match column count");
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j > 0) out << ',';
        out << header[j];
    }
    if (!header.empty()) out << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(matrix(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("write to '" + path + "' failed");
    }
}

Eigen::MatrixXd read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool saw_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (!parse_cell(cells[j], row[j])) {
                numeric = false;
                // Exactly one non-numeric leading row passes as a header.
                if (saw_data || line_no > 1) {
                    std::ostringstream msg;
                    msg << path << ": row " << line_no << ", column " << (j + 1)
                        << ": cannot parse '" << cells[j] << "' as a number";
                    throw DataError(msg.str());
                }
                break;
            }
        }
        if (!numeric) continue;  // header skipped
        if (!saw_data) {
            width = row.size();
            saw_data = true;
        } else if (row.size() != width) {
            std::ostringstream msg;
            msg << path << ": row " << line_no << " has " << row.size()
                << " columns, expected " << width;
            throw DataError(msg.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError(path + ": no numeric rows");
    }
    Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return matrix;
}

std::vector<int> read_labels(const std::string& path) {
    const Eigen::MatrixXd matrix = read_csv(path);
    if (matrix.cols() != 1) {
        throw DataError(path + ": expected a single label column, found " +
                        std::to_string(matrix.cols()));
    }
    std::vector<int> labels(static_cast<std::size_t>(matrix.rows()));
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(matrix(i, 0));
    }
    return labels;
}

}  // namespace specmix
