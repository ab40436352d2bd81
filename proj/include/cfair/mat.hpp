#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "cfair/errors.hpp"

namespace cfair {

/// Dense row-major matrix of doubles. Column vectors are n x 1,
/// row vectors 1 x n, scalars 1 x 1.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}

    static Mat column(const std::vector<double>& x) {
        Mat m(static_cast<int>(x.size()), 1);
        m.v = x;
        return m;
    }
    static Mat row(const std::vector<double>& x) {
        Mat m(1, static_cast<int>(x.size()));
        m.v = x;
        return m;
    }
    static Mat scalar(double x) {
        Mat m(1, 1);
        m.v[0] = x;
        return m;
    }

    double& operator()(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    int size() const { return rows * cols; }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }

    std::vector<double> row_vec(int r) const {
        return std::vector<double>(v.begin() + static_cast<size_t>(r) * cols,
                                   v.begin() + static_cast<size_t>(r + 1) * cols);
    }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

inline void require_shape(const Mat& m, int rows, int cols, const std::string& what) {
    if (m.rows != rows || m.cols != cols)
        throw DimensionError(what + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + m.shape_str());
}

}  // namespace cfair
