#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "snf/errors.hpp"

namespace snf {

/// Dense row-major rank-1/rank-2 real tensor. Vectors are (n, 1) columns.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Tensor vec(std::size_t n) { return Tensor(n, 1); }

    static Tensor identity(std::size_t n) {
        Tensor t(n, n);
        for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
        return t;
    }

    std::size_t size() const { return rows * cols; }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    std::string shape_str() const {
        return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline void check_finite(const Tensor& t, const char* context) {
    for (double v : t.data) {
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + context);
    }
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* orow = &out.data[i * b.cols];
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = &b.data[k * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    check_finite(out, "matmul");
    return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    check_finite(out, "add");
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    check_finite(out, "sub");
    return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    check_finite(out, "hadamard");
    return out;
}

inline void add_in_place(Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add_in_place");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline void scale_in_place(Tensor& a, double s) {
    for (double& v : a.data) v *= s;
}

// Stable logistic sigmoid; saturates instead of overflowing.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// tanh built on a single exp call; measurably faster than std::tanh here and
// exact at 0 by construction.
inline double tanh_act(double x) {
    const double a = std::abs(x);
    const double e = std::exp(-2.0 * a);
    const double r = (1.0 - e) / (1.0 + e);
    return x < 0.0 ? -r : r;
}

inline double sigmoid_derivative_from_value(double s) { return s * (1.0 - s); }
inline double tanh_derivative_from_value(double t) { return 1.0 - t * t; }

inline Tensor sigmoid(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v = sigmoid(v);
    return out;
}

inline Tensor tanh_act(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v = tanh_act(v);
    return out;
}

}  // namespace snf
