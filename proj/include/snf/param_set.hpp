#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "snf/errors.hpp"
#include "snf/rng.hpp"
#include "snf/tensor.hpp"

namespace snf {

struct Param {
    Tensor value;
    Tensor grad;
    bool frozen = false;
};

/// Ordered, name-addressed parameter registry. Iteration order is the
/// registration order, which fixes the RNG draw order and the checkpoint
/// tensor order.
class ParamSet {
public:
    Tensor& add(const std::string& name, Tensor value) {
        if (index_.count(name)) throw ArgumentError("duplicate parameter name: " + name);
        index_[name] = params_.size();
        Param p;
        p.grad = Tensor(value.rows, value.cols);
        p.value = std::move(value);
        names_.push_back(name);
        params_.push_back(std::move(p));
        return params_.back().value;
    }

    bool has(const std::string& name) const { return index_.count(name) != 0; }

    Param& param(const std::string& name) { return params_[index_of(name)]; }
    const Param& param(const std::string& name) const { return params_[index_of(name)]; }

    Tensor& value(const std::string& name) { return param(name).value; }
    const Tensor& value(const std::string& name) const { return param(name).value; }
    Tensor& grad(const std::string& name) { return param(name).grad; }

    void set_frozen(const std::string& name, bool frozen) { param(name).frozen = frozen; }
    bool frozen(const std::string& name) const { return param(name).frozen; }

    const std::vector<std::string>& names() const { return names_; }

    Param& at(std::size_t i) { return params_[i]; }
    const Param& at(std::size_t i) const { return params_[i]; }
    std::size_t count() const { return params_.size(); }

    void zero_grads() {
        for (Param& p : params_) p.grad.fill(0.0);
    }

    std::size_t trainable_coordinates() const {
        std::size_t n = 0;
        for (const Param& p : params_) {
            if (!p.frozen) n += p.value.size();
        }
        return n;
    }

    std::size_t total_coordinates() const {
        std::size_t n = 0;
        for (const Param& p : params_) n += p.value.size();
        return n;
    }

private:
    std::size_t index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ArgumentError("unknown parameter: " + name);
        return it->second;
    }

    std::vector<std::string> names_;
    std::vector<Param> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

// PyTorch-style gated-RNN init: every tensor uniform in [-k, k], k = 1/sqrt(fan_in).
inline void uniform_init(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-k, k);
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
public:
    explicit AdamState(AdamConfig config = {}) : config_(config) {}

    const AdamConfig& config() const { return config_; }
    std::int64_t step_count() const { return step_; }

    friend void adam_step(ParamSet& params, AdamState& state);

private:
    struct Moments {
        Tensor m;
        Tensor v;
    };

    Moments& moments_for(const std::string& name, const Tensor& like) {
        auto it = moments_.find(name);
        if (it == moments_.end()) {
            it = moments_.emplace(name, Moments{Tensor(like.rows, like.cols),
                                                Tensor(like.rows, like.cols)}).first;
        }
        Moments& m = it->second;
        if (!m.m.same_shape(like)) {
            throw ShapeError("adam_step: moment shape " + m.m.shape_str() +
                             " drifted from parameter " + like.shape_str());
        }
        return m;
    }

    AdamConfig config_;
    std::int64_t step_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

/// One Adam update with bias correction. Frozen parameters are untouched;
/// all gradients are zeroed afterwards.
inline void adam_step(ParamSet& params, AdamState& state) {
    state.step_ += 1;
    const AdamConfig& c = state.config_;
    const double t = static_cast<double>(state.step_);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t pi = 0; pi < params.count(); ++pi) {
        Param& p = params.at(pi);
        if (!p.frozen) {
            auto& mo = state.moments_for(params.names()[pi], p.value);
            for (std::size_t i = 0; i < p.value.data.size(); ++i) {
                const double g = p.grad.data[i];
                double& m = mo.m.data[i];
                double& v = mo.v.data[i];
                m = c.beta1 * m + (1.0 - c.beta1) * g;
                v = c.beta2 * v + (1.0 - c.beta2) * g * g;
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                p.value.data[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
            }
            check_finite(p.value, "adam_step");
        }
        p.grad.fill(0.0);
    }
}

/// Scales all trainable gradients so their global L2 norm is at most max_norm.
inline double clip_global_norm(ParamSet& params, double max_norm) {
    double sq = 0.0;
    for (std::size_t pi = 0; pi < params.count(); ++pi) {
        const Param& p = params.at(pi);
        if (p.frozen) continue;
        for (double g : p.grad.data) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (std::size_t pi = 0; pi < params.count(); ++pi) {
            Param& p = params.at(pi);
            if (p.frozen) continue;
            scale_in_place(p.grad, s);
        }
    }
    return norm;
}

/// Central-difference check of the analytic gradients currently stored in
/// `params` against the scalar loss closure. Returns the max over trainable
/// coordinates of |analytic - numeric| / max(1, |numeric|); 0 when every
/// parameter is frozen. The closure must not depend on the gradient buffers.
inline double finite_difference_check(const std::function<double(ParamSet&)>& loss,
                                      ParamSet& params, double h) {
    if (h <= 0.0) throw ArgumentError("finite_difference_check: h must be positive");
    const double base1 = loss(params);
    const double base2 = loss(params);
    if (base1 != base2) {
        throw NumericError("finite_difference_check: loss closure is non-deterministic");
    }
    // The closure may overwrite grads; keep the analytic ones aside.
    std::vector<Tensor> analytic;
    analytic.reserve(params.count());
    for (std::size_t pi = 0; pi < params.count(); ++pi) analytic.push_back(params.at(pi).grad);

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.count(); ++pi) {
        Param& p = params.at(pi);
        if (p.frozen) continue;
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double saved = p.value.data[i];
            p.value.data[i] = saved + h;
            const double lp = loss(params);
            p.value.data[i] = saved - h;
            const double lm = loss(params);
            p.value.data[i] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double rel = std::abs(analytic[pi].data[i] - numeric) /
                               std::max(1.0, std::abs(numeric));
            if (rel > max_rel) max_rel = rel;
        }
    }
    for (std::size_t pi = 0; pi < params.count(); ++pi) params.at(pi).grad = analytic[pi];
    return max_rel;
}

}  // namespace snf
