#pragma once

#include <string>
#include <vector>

#include "cortex/types.hpp"

namespace cortex {

struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> data;  // row-major

    double& at(int r, int c) { return data[size_t(r) * cols + c]; }
    double at(int r, int c) const { return data[size_t(r) * cols + c]; }
};

// Exact round-trip CSV (17 significant digits), header row of column indices.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// Portable grayscale image (ASCII P2, 16-bit), linearly rescaled; the true
// min/max land in a sidecar text file so no information is silently lost.
void write_pgm_with_sidecar(const std::string& path_base, const Matrix& m);

}  // namespace cortex
