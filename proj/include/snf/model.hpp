#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snf/errors.hpp"
#include "snf/lstm.hpp"
#include "snf/nn.hpp"
#include "snf/param_set.hpp"
#include "snf/sncurve.hpp"

namespace snf {

struct ModelConfig {
    std::size_t lstm_hidden = 64;
    std::size_t fc_units = 64;
    std::size_t window_len = 50;
    std::size_t input_size = 1;
    std::size_t dnn_layers = 4;
    std::size_t dnn_units = 32;
    std::uint64_t seed = 42;
};

/// LSTM cell -> 64-unit tanh FC layer -> 1-unit linear output, predicting the
/// next scaled stress from a window of previous ones.
struct LstmRegressor {
    ParamSet params;  // "lstm.*", "head.W1", "head.b1", "head.W2", "head.b2"
    LstmParams lstm;
    std::size_t fc_units = 64;
    std::size_t window_len = 50;
    std::optional<ScalerState> scaler;

    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    double final_loss = std::numeric_limits<double>::quiet_NaN();

    bool lstm_frozen() const {
        for (const std::string& name : params.names()) {
            if (name.rfind("lstm.", 0) == 0 && !params.frozen(name)) return false;
        }
        return true;
    }
};

inline LstmRegressor build_lstm_regressor(const ModelConfig& config) {
    if (config.lstm_hidden == 0 || config.fc_units == 0 || config.window_len == 0 ||
        config.input_size == 0) {
        throw ArgumentError("build_lstm_regressor: sizes must be positive");
    }
    LstmRegressor m;
    m.lstm.prefix = "lstm";
    m.lstm.input_size = config.input_size;
    m.lstm.hidden_size = config.lstm_hidden;
    m.fc_units = config.fc_units;
    m.window_len = config.window_len;
    m.seed = config.seed;
    Rng rng(config.seed);
    register_lstm_params(m.params, m.lstm, rng);
    Tensor w1(config.fc_units, config.lstm_hidden);
    uniform_init(w1, config.lstm_hidden, rng);
    m.params.add("head.W1", std::move(w1));
    Tensor b1(config.fc_units, 1);
    uniform_init(b1, config.lstm_hidden, rng);
    m.params.add("head.b1", std::move(b1));
    Tensor w2(1, config.fc_units);
    uniform_init(w2, config.fc_units, rng);
    m.params.add("head.W2", std::move(w2));
    Tensor b2(1, 1);
    uniform_init(b2, config.fc_units, rng);
    m.params.add("head.b2", std::move(b2));
    return m;
}

/// Head applied to a hidden state: tanh FC then linear output.
inline double head_forward(const LstmRegressor& m, const Tensor& h) {
    const Tensor a1 = tanh_act(linear_forward(m.params.value("head.W1"),
                                              m.params.value("head.b1"), h));
    const Tensor out = linear_forward(m.params.value("head.W2"), m.params.value("head.b2"), a1);
    return out.data[0];
}

inline double regressor_forward(const LstmRegressor& m, std::span<const double> window) {
    if (window.size() != m.window_len) {
        throw ArgumentError("regressor_forward: window length " +
                            std::to_string(window.size()) + " != " +
                            std::to_string(m.window_len));
    }
    std::vector<Tensor> inputs;
    inputs.reserve(window.size());
    for (double v : window) {
        Tensor x = Tensor::vec(1);
        x.data[0] = v;
        inputs.push_back(std::move(x));
    }
    const SequenceResult seq =
        sequence_forward(m.params, m.lstm, inputs, zero_state(m.lstm.hidden_size));
    return head_forward(m, seq.final_state.h);
}

/// Copies the source LSTM tensors into a fresh model and freezes them; the
/// head is reinitialized from `seed`. The scaler is left unset until the
/// target training data is known.
inline LstmRegressor transfer_surgery(const LstmRegressor& source, std::uint64_t seed) {
    LstmRegressor target;
    target.lstm = source.lstm;
    target.fc_units = source.fc_units;
    target.window_len = source.window_len;
    target.seed = seed;
    for (const std::string& name : source.params.names()) {
        target.params.add(name, source.params.value(name));
        if (name.rfind("lstm.", 0) == 0) target.params.set_frozen(name, true);
    }
    Rng rng(seed);
    uniform_init(target.params.value("head.W1"), source.lstm.hidden_size, rng);
    uniform_init(target.params.value("head.b1"), source.lstm.hidden_size, rng);
    uniform_init(target.params.value("head.W2"), source.fc_units, rng);
    uniform_init(target.params.value("head.b2"), source.fc_units, rng);
    return target;
}

/// Feed-forward baseline: scaled log10(N) in, scaled stress out, through
/// `dnn_layers` tanh layers of `dnn_units` units and a linear output.
struct DnnBaseline {
    ParamSet params;  // "fc<k>.W", "fc<k>.b" for k=1.., "out.W", "out.b"
    std::size_t layers = 4;
    std::size_t units = 32;
    std::optional<ScalerState> scaler;
    // Input normalization: log10(N) min-max over the training region.
    double log_n_min = 0.0;
    double log_n_max = 1.0;

    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    double final_loss = std::numeric_limits<double>::quiet_NaN();

    double scale_log_n(double log_n) const {
        return (log_n - log_n_min) / (log_n_max - log_n_min);
    }
};

inline DnnBaseline build_dnn(const ModelConfig& config) {
    if (config.dnn_layers == 0 || config.dnn_units == 0) {
        throw ArgumentError("build_dnn: sizes must be positive");
    }
    DnnBaseline m;
    m.layers = config.dnn_layers;
    m.units = config.dnn_units;
    m.seed = config.seed;
    Rng rng(config.seed);
    std::size_t fan_in = 1;
    for (std::size_t k = 1; k <= m.layers; ++k) {
        const std::string stem = "fc" + std::to_string(k);
        Tensor w(m.units, fan_in);
        uniform_init(w, fan_in, rng);
        m.params.add(stem + ".W", std::move(w));
        Tensor b(m.units, 1);
        uniform_init(b, fan_in, rng);
        m.params.add(stem + ".b", std::move(b));
        fan_in = m.units;
    }
    Tensor w(1, fan_in);
    uniform_init(w, fan_in, rng);
    m.params.add("out.W", std::move(w));
    Tensor b(1, 1);
    uniform_init(b, fan_in, rng);
    m.params.add("out.b", std::move(b));
    return m;
}

inline double dnn_forward(const DnnBaseline& m, double scaled_log_n) {
    Tensor a = Tensor::vec(1);
    a.data[0] = scaled_log_n;
    for (std::size_t k = 1; k <= m.layers; ++k) {
        const std::string stem = "fc" + std::to_string(k);
        a = tanh_act(linear_forward(m.params.value(stem + ".W"),
                                    m.params.value(stem + ".b"), a));
    }
    const Tensor out = linear_forward(m.params.value("out.W"), m.params.value("out.b"), a);
    return out.data[0];
}

}  // namespace snf
