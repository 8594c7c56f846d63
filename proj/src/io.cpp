#include "cortex/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cortex {

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out.precision(17);
    out << "row";
    for (int c = 0; c < m.cols; ++c) out << "," << c;
    out << "\n";
    for (int r = 0; r < m.rows; ++r) {
        out << r;
        for (int c = 0; c < m.cols; ++c) out << "," << m.at(r, c);
        out << "\n";
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty csv: " + path);
    Matrix m;
    m.cols = static_cast<int>(std::count(line.begin(), line.end(), ','));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // row label
        for (int c = 0; c < m.cols; ++c) {
            std::getline(ss, cell, ',');
            m.data.push_back(std::stod(cell));
        }
        ++m.rows;
    }
    return m;
}

void write_pgm_with_sidecar(const std::string& path_base, const Matrix& m) {
    double lo = m.data.empty() ? 0.0 : m.data[0];
    double hi = lo;
    for (double v : m.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = hi - lo;

    std::ofstream img(path_base + ".pgm");
    if (!img) throw ConfigError("cannot write " + path_base + ".pgm");
    img << "P2\n" << m.cols << " " << m.rows << "\n65535\n";
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            double v = span > 0.0 ? (m.at(r, c) - lo) / span : 0.0;
            img << static_cast<int>(std::lround(v * 65535.0)) << (c + 1 == m.cols ? "" : " ");
        }
        img << "\n";
    }

    std::ofstream side(path_base + ".minmax.txt");
    side.precision(17);
    side << "min " << lo << "\nmax " << hi << "\n";
}

}  // namespace cortex
