#pragma once

#include <utility>

#include "snf/errors.hpp"
#include "snf/tensor.hpp"

namespace snf {

/// y = W x + b for a column vector x.
inline Tensor linear_forward(const Tensor& W, const Tensor& b, const Tensor& x) {
    if (W.cols != x.rows || x.cols != 1 || b.rows != W.rows || b.cols != 1) {
        throw ShapeError("linear_forward: W " + W.shape_str() + ", b " + b.shape_str() +
                         ", x " + x.shape_str());
    }
    Tensor y = b;
    for (std::size_t i = 0; i < W.rows; ++i) {
        const double* wr = &W.data[i * W.cols];
        double s = 0.0;
        for (std::size_t k = 0; k < W.cols; ++k) s += wr[k] * x.data[k];
        y.data[i] += s;
    }
    check_finite(y, "linear_forward");
    return y;
}

/// Accumulates dW += up x^T and db += up; returns dx = W^T up.
inline Tensor linear_backward(const Tensor& W, const Tensor& x, const Tensor& upstream,
                              Tensor& dW, Tensor& db) {
    if (upstream.rows != W.rows || upstream.cols != 1) {
        throw ShapeError("linear_backward: upstream " + upstream.shape_str() + " vs W " +
                         W.shape_str());
    }
    require_same_shape(dW, W, "linear_backward dW");
    require_same_shape(db, upstream, "linear_backward db");
    Tensor dx(x.rows, 1);
    for (std::size_t i = 0; i < W.rows; ++i) {
        const double u = upstream.data[i];
        db.data[i] += u;
        double* dwr = &dW.data[i * W.cols];
        const double* wr = &W.data[i * W.cols];
        for (std::size_t k = 0; k < W.cols; ++k) {
            dwr[k] += u * x.data[k];
            dx.data[k] += wr[k] * u;
        }
    }
    return dx;
}

struct MseResult {
    double loss;
    Tensor grad;  // d loss / d pred
};

inline MseResult mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    if (pred.size() == 0) throw ArgumentError("mse_loss: empty input");
    MseResult r{0.0, Tensor(pred.rows, pred.cols)};
    const double n = static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        r.loss += d * d;
        r.grad.data[i] = 2.0 * d / n;
    }
    r.loss /= n;
    return r;
}

}  // namespace snf
