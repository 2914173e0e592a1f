#include "droopstab/matrix_io.hpp"

#include "droopstab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace droopstab {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_matrix_csv(os, m);
}

Matrix read_matrix_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto first = cell.find_first_not_of(" \t");
            const auto last = cell.find_last_not_of(" \t");
            if (first == std::string::npos) {
                throw ParseError("empty cell on line " + std::to_string(lineno));
            }
            const char* b = cell.data() + first;
            const char* e = cell.data() + last + 1;
            if (*b == '+') ++b;
            double v = 0.0;
            const auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc() || res.ptr != e) {
                throw ParseError("malformed number '" + cell + "' on line " +
                                 std::to_string(lineno));
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("ragged row on line " + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open " + path);
    return read_matrix_csv(is);
}

Eigen::VectorXcd sorted_eigenvalues(const Eigen::VectorXcd& eig) {
    std::vector<std::complex<double>> v(eig.data(), eig.data() + eig.size());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    Eigen::VectorXcd out(eig.size());
    for (Eigen::Index i = 0; i < eig.size(); ++i) out(i) = v[static_cast<size_t>(i)];
    return out;
}

void write_eigenvalues_csv(std::ostream& os, const Eigen::VectorXcd& eig) {
    os << "re,im\n";
    const Eigen::VectorXcd s = sorted_eigenvalues(eig);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        os << format_double(s(i).real()) << ',' << format_double(s(i).imag()) << '\n';
    }
}

}  // namespace droopstab
