#pragma once

#include <string>
#include <utility>
#include <vector>

#include "snf/errors.hpp"
#include "snf/param_set.hpp"
#include "snf/tensor.hpp"

namespace snf {

/// Names and sizes of one LSTM cell's parameters inside a ParamSet.
/// Tensor names are `<prefix>.W_fx`, `<prefix>.W_fh`, `<prefix>.b_f` and the
/// analogous i/g/o triples.
struct LstmParams {
    std::string prefix = "lstm";
    std::size_t input_size = 1;
    std::size_t hidden_size = 64;

    std::string wx(char gate) const { return prefix + ".W_" + gate + "x"; }
    std::string wh(char gate) const { return prefix + ".W_" + gate + "h"; }
    std::string bias(char gate) const { return prefix + ".b_" + std::string(1, gate); }

    // 4 (h*i + h*h + h)
    std::size_t coordinate_count() const {
        return 4 * (hidden_size * input_size + hidden_size * hidden_size + hidden_size);
    }
};

inline constexpr char kLstmGates[4] = {'f', 'i', 'g', 'o'};

inline void register_lstm_params(ParamSet& params, const LstmParams& spec, Rng& rng) {
    if (spec.hidden_size == 0 || spec.input_size == 0) {
        throw ArgumentError("register_lstm_params: sizes must be positive");
    }
    for (char g : kLstmGates) {
        Tensor wx(spec.hidden_size, spec.input_size);
        uniform_init(wx, spec.hidden_size, rng);
        params.add(spec.wx(g), std::move(wx));
        Tensor wh(spec.hidden_size, spec.hidden_size);
        uniform_init(wh, spec.hidden_size, rng);
        params.add(spec.wh(g), std::move(wh));
        Tensor b(spec.hidden_size, 1);
        uniform_init(b, spec.hidden_size, rng);
        params.add(spec.bias(g), std::move(b));
    }
}

struct LstmState {
    Tensor h;  // short-term state, also the cell output
    Tensor c;  // long-term cell state
};

inline LstmState zero_state(std::size_t hidden_size) {
    return LstmState{Tensor::vec(hidden_size), Tensor::vec(hidden_size)};
}

struct LstmStepCache {
    Tensor x, h_prev, c_prev;
    Tensor f, i, g, o;
    Tensor c, tanh_c;
};

using BpttCache = std::vector<LstmStepCache>;

namespace detail {

// Resolved tensor pointers, so sequence loops skip name lookups.
struct LstmRefs {
    const Tensor *wx[4], *wh[4], *b[4];

    LstmRefs(const ParamSet& params, const LstmParams& spec) {
        for (int k = 0; k < 4; ++k) {
            wx[k] = &params.value(spec.wx(kLstmGates[k]));
            wh[k] = &params.value(spec.wh(kLstmGates[k]));
            b[k] = &params.value(spec.bias(kLstmGates[k]));
        }
    }
};

struct LstmGradRefs {
    Tensor *wx[4], *wh[4], *b[4];

    LstmGradRefs(ParamSet& params, const LstmParams& spec) {
        for (int k = 0; k < 4; ++k) {
            wx[k] = &params.grad(spec.wx(kLstmGates[k]));
            wh[k] = &params.grad(spec.wh(kLstmGates[k]));
            b[k] = &params.grad(spec.bias(kLstmGates[k]));
        }
    }
};

// pre = W_x x + W_h h_prev + b
inline void gate_preactivation(const Tensor& wx, const Tensor& wh, const Tensor& b,
                               const Tensor& x, const Tensor& h_prev, Tensor& pre) {
    const std::size_t h = wx.rows;
    const std::size_t in = wx.cols;
    pre = b;
    for (std::size_t r = 0; r < h; ++r) {
        const double* wxr = &wx.data[r * in];
        double s = 0.0;
        for (std::size_t k = 0; k < in; ++k) s += wxr[k] * x.data[k];
        const double* whr = &wh.data[r * h];
        for (std::size_t k = 0; k < h; ++k) s += whr[k] * h_prev.data[k];
        pre.data[r] += s;
    }
}

inline std::pair<LstmState, LstmStepCache> cell_forward_impl(const LstmRefs& refs,
                                                             const LstmParams& spec,
                                                             const Tensor& x,
                                                             const LstmState& prev) {
    if (x.rows != spec.input_size || x.cols != 1) {
        throw ShapeError("cell_forward: input " + x.shape_str() + " vs input_size " +
                         std::to_string(spec.input_size));
    }
    if (prev.h.rows != spec.hidden_size || prev.c.rows != spec.hidden_size) {
        throw ShapeError("cell_forward: state " + prev.h.shape_str() + " vs hidden_size " +
                         std::to_string(spec.hidden_size));
    }
    LstmStepCache cache;
    cache.x = x;
    cache.h_prev = prev.h;
    cache.c_prev = prev.c;

    Tensor pre;
    gate_preactivation(*refs.wx[0], *refs.wh[0], *refs.b[0], x, prev.h, pre);
    cache.f = sigmoid(pre);
    gate_preactivation(*refs.wx[1], *refs.wh[1], *refs.b[1], x, prev.h, pre);
    cache.i = sigmoid(pre);
    gate_preactivation(*refs.wx[2], *refs.wh[2], *refs.b[2], x, prev.h, pre);
    cache.g = tanh_act(pre);
    gate_preactivation(*refs.wx[3], *refs.wh[3], *refs.b[3], x, prev.h, pre);
    cache.o = sigmoid(pre);

    const std::size_t h = spec.hidden_size;
    LstmState next{Tensor::vec(h), Tensor::vec(h)};
    cache.c = Tensor::vec(h);
    cache.tanh_c = Tensor::vec(h);
    for (std::size_t j = 0; j < h; ++j) {
        const double c = cache.g.data[j] * cache.i.data[j] + prev.c.data[j] * cache.f.data[j];
        cache.c.data[j] = c;
        const double tc = tanh_act(c);
        cache.tanh_c.data[j] = tc;
        next.c.data[j] = c;
        next.h.data[j] = cache.o.data[j] * tc;
    }
    check_finite(next.c, "cell_forward");
    return {std::move(next), std::move(cache)};
}

}  // namespace detail

/// One LSTM step:
///   f = sigmoid(W_fx x + W_fh h_prev + b_f), i and o analogous,
///   g = tanh(W_gx x + W_gh h_prev + b_g),
///   c = g*i + c_prev*f,  h = o * tanh(c).
inline std::pair<LstmState, LstmStepCache> cell_forward(const ParamSet& params,
                                                        const LstmParams& spec,
                                                        const Tensor& x,
                                                        const LstmState& prev) {
    detail::LstmRefs refs(params, spec);
    return detail::cell_forward_impl(refs, spec, x, prev);
}

struct SequenceResult {
    std::vector<Tensor> outputs;  // h_t per step
    LstmState final_state;
    BpttCache cache;
};

inline SequenceResult sequence_forward(const ParamSet& params, const LstmParams& spec,
                                       const std::vector<Tensor>& inputs,
                                       const LstmState& init) {
    if (inputs.empty()) throw ArgumentError("sequence_forward: empty input sequence");
    detail::LstmRefs refs(params, spec);
    SequenceResult r;
    r.outputs.reserve(inputs.size());
    r.cache.reserve(inputs.size());
    LstmState state = init;
    for (const Tensor& x : inputs) {
        auto [next, cache] = detail::cell_forward_impl(refs, spec, x, state);
        state = std::move(next);
        r.outputs.push_back(state.h);
        r.cache.push_back(std::move(cache));
    }
    r.final_state = std::move(state);
    return r;
}

/// Reverse-mode gradients of the forward recurrence. output_grads[t] is
/// d loss / d h_t (may be zero for steps without loss). Parameter gradients
/// accumulate into `params`; the return value is the gradient with respect to
/// the initial state.
inline LstmState bptt_backward(ParamSet& params, const LstmParams& spec,
                               const BpttCache& cache,
                               const std::vector<Tensor>& output_grads) {
    if (cache.size() != output_grads.size()) {
        throw ArgumentError("bptt_backward: cache length " + std::to_string(cache.size()) +
                            " vs output_grads length " + std::to_string(output_grads.size()));
    }
    if (cache.empty()) throw ArgumentError("bptt_backward: empty cache");
    detail::LstmRefs refs(params, spec);
    detail::LstmGradRefs grads(params, spec);

    const std::size_t h = spec.hidden_size;
    const std::size_t in = spec.input_size;
    Tensor dh_next = Tensor::vec(h);
    Tensor dc_next = Tensor::vec(h);
    Tensor dpre[4];
    for (auto& t : dpre) t = Tensor::vec(h);

    for (std::size_t t = cache.size(); t-- > 0;) {
        const LstmStepCache& s = cache[t];
        if (output_grads[t].rows != h || output_grads[t].cols != 1) {
            throw ShapeError("bptt_backward: output_grads[" + std::to_string(t) + "] " +
                             output_grads[t].shape_str());
        }
        for (std::size_t j = 0; j < h; ++j) {
            const double dh = output_grads[t].data[j] + dh_next.data[j];
            const double o = s.o.data[j];
            const double tc = s.tanh_c.data[j];
            const double dc = dc_next.data[j] + dh * o * (1.0 - tc * tc);
            const double f = s.f.data[j];
            const double i = s.i.data[j];
            const double g = s.g.data[j];
            dpre[0].data[j] = dc * s.c_prev.data[j] * f * (1.0 - f);   // forget gate
            dpre[1].data[j] = dc * g * i * (1.0 - i);                  // input gate
            dpre[2].data[j] = dc * i * (1.0 - g * g);                  // candidate
            dpre[3].data[j] = dh * tc * o * (1.0 - o);                 // output gate
            dc_next.data[j] = dc * f;
        }
        dh_next.fill(0.0);
        for (int k = 0; k < 4; ++k) {
            const Tensor& wh = *refs.wh[k];
            Tensor& dwx = *grads.wx[k];
            Tensor& dwh = *grads.wh[k];
            Tensor& db = *grads.b[k];
            for (std::size_t r = 0; r < h; ++r) {
                const double u = dpre[k].data[r];
                db.data[r] += u;
                double* dwxr = &dwx.data[r * in];
                for (std::size_t j = 0; j < in; ++j) dwxr[j] += u * s.x.data[j];
                double* dwhr = &dwh.data[r * h];
                const double* whr = &wh.data[r * h];
                for (std::size_t j = 0; j < h; ++j) {
                    dwhr[j] += u * s.h_prev.data[j];
                    dh_next.data[j] += whr[j] * u;
                }
            }
        }
    }
    return LstmState{std::move(dh_next), std::move(dc_next)};
}

}  // namespace snf
