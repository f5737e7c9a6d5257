#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snf/errors.hpp"
#include "snf/model.hpp"
#include "snf/param_set.hpp"
#include "snf/sncurve.hpp"

namespace snf {

struct TrainConfig {
    std::size_t window_len = 50;
    std::size_t epochs = 500;
    AdamConfig adam;
    std::uint64_t seed = 42;
    double clip_norm = 5.0;  // <= 0 disables clipping
};

struct Window {
    std::vector<double> input;
    double target;
};

struct WindowSet {
    std::size_t window_len = 0;
    std::vector<Window> windows;

    std::size_t count() const { return windows.size(); }
};

/// Sliding windows with stride 1: window i covers [i, i+window_len), target
/// is index i+window_len. Count = length - window_len.
inline WindowSet make_windows(const std::vector<double>& scaled, std::size_t window_len) {
    if (window_len == 0) throw ArgumentError("make_windows: window_len must be positive");
    if (scaled.size() <= window_len) {
        throw ArgumentError("make_windows: series length " + std::to_string(scaled.size()) +
                            " must exceed window_len " + std::to_string(window_len));
    }
    WindowSet ws;
    ws.window_len = window_len;
    ws.windows.reserve(scaled.size() - window_len);
    for (std::size_t i = 0; i + window_len < scaled.size(); ++i) {
        Window w;
        w.input.assign(scaled.begin() + static_cast<std::ptrdiff_t>(i),
                       scaled.begin() + static_cast<std::ptrdiff_t>(i + window_len));
        w.target = scaled[i + window_len];
        ws.windows.push_back(std::move(w));
    }
    return ws;
}

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) {
        throw ArgumentError("rmse: length mismatch " + std::to_string(pred.size()) + " vs " +
                            std::to_string(truth.size()));
    }
    if (pred.empty()) throw ArgumentError("rmse: empty input");
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(pred.size()));
}

// ---------------------------------------------------------------------------
// Batched full-batch trainer. Windows are processed in chunks of up to
// kChunk columns so the per-step work becomes h x h x B matrix products
// instead of per-window matvecs; gradients accumulate in fixed chunk order,
// so results are deterministic.

namespace detail {

inline constexpr std::size_t kChunk = 64;

// Row-major h x B work matrices, flat.
struct BatchWorkspace {
    std::size_t h = 0, fc = 0, steps = 0, chunk = 0;
    // per-step caches, each steps * h * chunk
    std::vector<double> f, i, g, o, c, tanh_c, hs;
    std::vector<double> H, C, pre;
    std::vector<double> dH, dC, dpre[4];
    std::vector<double> z1, a1, pred, dpred, dz1, dh_head;

    void resize(std::size_t hidden, std::size_t fc_units, std::size_t n_steps,
                std::size_t chunk_size) {
        h = hidden;
        fc = fc_units;
        steps = n_steps;
        chunk = chunk_size;
        const std::size_t per_step = h * chunk;
        f.resize(steps * per_step);
        i.resize(steps * per_step);
        g.resize(steps * per_step);
        o.resize(steps * per_step);
        c.resize(steps * per_step);
        tanh_c.resize(steps * per_step);
        hs.resize(steps * per_step);
        H.resize(per_step);
        C.resize(per_step);
        pre.resize(per_step);
        dH.resize(per_step);
        dC.resize(per_step);
        for (auto& v : dpre) v.resize(per_step);
        z1.resize(fc * chunk);
        a1.resize(fc * chunk);
        pred.resize(chunk);
        dpred.resize(chunk);
        dz1.resize(fc * chunk);
        dh_head.resize(per_step);
    }
};

// out(h x B) += W(h x h) * in(h x B); the B-dimension matrices have leading
// dimension ld (the workspace chunk width).
inline void gemm_nn_acc(const double* W, const double* in, double* out, std::size_t h,
                        std::size_t rows, std::size_t B, std::size_t ld) {
    // k blocked by 4 so each pass over the output row does 4 fused
    // multiply-adds per load/store; order is fixed, so results stay
    // deterministic.
    for (std::size_t r = 0; r < rows; ++r) {
        double* orow = out + r * ld;
        const double* wrow = W + r * h;
        std::size_t k = 0;
        for (; k + 4 <= h; k += 4) {
            const double w0 = wrow[k], w1 = wrow[k + 1], w2 = wrow[k + 2], w3 = wrow[k + 3];
            const double* i0 = in + k * ld;
            const double* i1 = i0 + ld;
            const double* i2 = i1 + ld;
            const double* i3 = i2 + ld;
            for (std::size_t b = 0; b < B; ++b) {
                orow[b] += w0 * i0[b] + w1 * i1[b] + w2 * i2[b] + w3 * i3[b];
            }
        }
        for (; k < h; ++k) {
            const double w = wrow[k];
            const double* irow = in + k * ld;
            for (std::size_t b = 0; b < B; ++b) orow[b] += w * irow[b];
        }
    }
}

// out(rows x cols) += A(rows x B) * T(cols x B)^T; A and T have leading
// dimension ld, out is dense.
inline void gemm_nt_acc(const double* A, const double* T, double* out, std::size_t rows,
                        std::size_t cols, std::size_t B, std::size_t ld) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = A + r * ld;
        double* orow = out + r * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            const double* trow = T + j * ld;
            // Eight-lane dot product: fixed summation order that the
            // compiler can vectorize, unlike a single scalar accumulator.
            double lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            std::size_t b = 0;
            for (; b + 8 <= B; b += 8) {
                for (int l = 0; l < 8; ++l) lanes[l] += arow[b + l] * trow[b + l];
            }
            double s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
                       ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7]));
            for (; b < B; ++b) s += arow[b] * trow[b];
            orow[j] += s;
        }
    }
}

// out(cols x B) += W(rows x cols)^T * A(rows x B); A and out have leading
// dimension ld, W is dense.
inline void gemm_tn_acc(const double* W, const double* A, double* out, std::size_t rows,
                        std::size_t cols, std::size_t B, std::size_t ld) {
    // r blocked by 4: four A rows are combined per pass over each output
    // row, quartering the accumulator traffic; order stays fixed.
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* a0 = A + r * ld;
        const double* a1 = a0 + ld;
        const double* a2 = a1 + ld;
        const double* a3 = a2 + ld;
        const double* w0 = W + r * cols;
        const double* w1 = w0 + cols;
        const double* w2 = w1 + cols;
        const double* w3 = w2 + cols;
        for (std::size_t j = 0; j < cols; ++j) {
            double* orow = out + j * ld;
            const double c0 = w0[j], c1 = w1[j], c2 = w2[j], c3 = w3[j];
            for (std::size_t b = 0; b < B; ++b) {
                orow[b] += c0 * a0[b] + c1 * a1[b] + c2 * a2[b] + c3 * a3[b];
            }
        }
    }
    for (; r < rows; ++r) {
        const double* arow = A + r * ld;
        const double* wrow = W + r * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            const double w = wrow[j];
            double* orow = out + j * ld;
            for (std::size_t b = 0; b < B; ++b) orow[b] += w * arow[b];
        }
    }
}

// Forward over a chunk of windows, filling the per-step activation caches.
inline void lstm_chunk_forward(const LstmRegressor& m, const WindowSet& windows,
                               std::size_t begin, std::size_t B, BatchWorkspace& ws) {
    const std::size_t h = m.lstm.hidden_size;
    const std::size_t T = windows.window_len;
    const Tensor* wx[4];
    const Tensor* wh[4];
    const Tensor* bias[4];
    for (int k = 0; k < 4; ++k) {
        wx[k] = &m.params.value(m.lstm.wx(kLstmGates[k]));
        wh[k] = &m.params.value(m.lstm.wh(kLstmGates[k]));
        bias[k] = &m.params.value(m.lstm.bias(kLstmGates[k]));
    }
    std::fill(ws.H.begin(), ws.H.end(), 0.0);
    std::fill(ws.C.begin(), ws.C.end(), 0.0);
    const std::size_t per_step = h * ws.chunk;
    double* gate_out[4];
    for (std::size_t t = 0; t < T; ++t) {
        double* fp = &ws.f[t * per_step];
        double* ip = &ws.i[t * per_step];
        double* gp = &ws.g[t * per_step];
        double* op = &ws.o[t * per_step];
        gate_out[0] = fp;
        gate_out[1] = ip;
        gate_out[2] = gp;
        gate_out[3] = op;
        for (int k = 0; k < 4; ++k) {
            double* pre = gate_out[k];
            // bias + W_x * x_t (input_size == 1)
            for (std::size_t r = 0; r < h; ++r) {
                const double bb = bias[k]->data[r];
                const double w = wx[k]->data[r];
                double* row = pre + r * ws.chunk;
                for (std::size_t b = 0; b < B; ++b) {
                    row[b] = bb + w * windows.windows[begin + b].input[t];
                }
            }
            gemm_nn_acc(wh[k]->data.data(), ws.H.data(), pre, h, h, B, ws.chunk);
        }
        double* cp = &ws.c[t * per_step];
        double* tcp = &ws.tanh_c[t * per_step];
        double* hp = &ws.hs[t * per_step];
        for (std::size_t r = 0; r < h; ++r) {
            const std::size_t off = r * ws.chunk;
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t idx = off + b;
                const double f = sigmoid(fp[idx]);
                const double i = sigmoid(ip[idx]);
                const double g = tanh_act(gp[idx]);
                const double o = sigmoid(op[idx]);
                fp[idx] = f;
                ip[idx] = i;
                gp[idx] = g;
                op[idx] = o;
                const double c = g * i + ws.C[idx] * f;
                const double tc = tanh_act(c);
                cp[idx] = c;
                tcp[idx] = tc;
                const double hv = o * tc;
                hp[idx] = hv;
                ws.C[idx] = c;
                ws.H[idx] = hv;
            }
        }
    }
}

/// One full-batch gradient accumulation pass over all windows. Returns the
/// mean squared error over all windows; parameter gradients (for non-frozen
/// LSTM tensors and the head) are accumulated into m.params.
inline double accumulate_full_batch_gradients(LstmRegressor& m, const WindowSet& windows) {
    if (m.lstm.input_size != 1) {
        throw ArgumentError("batched trainer supports input_size == 1 only");
    }
    const std::size_t h = m.lstm.hidden_size;
    const std::size_t fc = m.fc_units;
    const std::size_t T = windows.window_len;
    const std::size_t total = windows.count();
    const bool lstm_trainable = !m.lstm_frozen();

    const Tensor& W1 = m.params.value("head.W1");
    const Tensor& b1 = m.params.value("head.b1");
    const Tensor& W2 = m.params.value("head.W2");
    const Tensor& b2 = m.params.value("head.b2");
    Tensor& dW1 = m.params.grad("head.W1");
    Tensor& db1 = m.params.grad("head.b1");
    Tensor& dW2 = m.params.grad("head.W2");
    Tensor& db2 = m.params.grad("head.b2");

    const Tensor* wh[4];
    Tensor* dwx[4];
    Tensor* dwh[4];
    Tensor* db[4];
    for (int k = 0; k < 4; ++k) {
        wh[k] = &m.params.value(m.lstm.wh(kLstmGates[k]));
        dwx[k] = &m.params.grad(m.lstm.wx(kLstmGates[k]));
        dwh[k] = &m.params.grad(m.lstm.wh(kLstmGates[k]));
        db[k] = &m.params.grad(m.lstm.bias(kLstmGates[k]));
    }

    static thread_local BatchWorkspace ws;
    ws.resize(h, fc, T, kChunk);
    const std::size_t per_step = h * ws.chunk;

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < total; begin += kChunk) {
        const std::size_t B = std::min(kChunk, total - begin);
        lstm_chunk_forward(m, windows, begin, B, ws);

        // Head forward on final hidden states.
        const double* Hfin = &ws.hs[(T - 1) * per_step];
        for (std::size_t r = 0; r < fc; ++r) {
            double* row = &ws.z1[r * ws.chunk];
            const double bb = b1.data[r];
            for (std::size_t b = 0; b < B; ++b) row[b] = bb;
        }
        gemm_nn_acc(W1.data.data(), Hfin, ws.z1.data(), h, fc, B, ws.chunk);
        for (std::size_t idx = 0; idx < fc * ws.chunk; ++idx) ws.a1[idx] = tanh_act(ws.z1[idx]);
        for (std::size_t b = 0; b < B; ++b) ws.pred[b] = b2.data[0];
        for (std::size_t r = 0; r < fc; ++r) {
            const double w = W2.data[r];
            const double* row = &ws.a1[r * ws.chunk];
            for (std::size_t b = 0; b < B; ++b) ws.pred[b] += w * row[b];
        }
        for (std::size_t b = 0; b < B; ++b) {
            const double diff = ws.pred[b] - windows.windows[begin + b].target;
            loss_sum += diff * diff;
            ws.dpred[b] = 2.0 * diff / static_cast<double>(total);
        }

        // Head backward.
        for (std::size_t b = 0; b < B; ++b) db2.data[0] += ws.dpred[b];
        std::fill(ws.dz1.begin(), ws.dz1.end(), 0.0);
        for (std::size_t r = 0; r < fc; ++r) {
            const double w2 = W2.data[r];
            const double* arow = &ws.a1[r * ws.chunk];
            double* zrow = &ws.dz1[r * ws.chunk];
            double dw2 = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                dw2 += ws.dpred[b] * arow[b];
                const double da = w2 * ws.dpred[b];
                zrow[b] = da * (1.0 - arow[b] * arow[b]);
            }
            dW2.data[r] += dw2;
        }
        for (std::size_t r = 0; r < fc; ++r) {
            const double* zrow = &ws.dz1[r * ws.chunk];
            double s = 0.0;
            for (std::size_t b = 0; b < B; ++b) s += zrow[b];
            db1.data[r] += s;
        }
        gemm_nt_acc(ws.dz1.data(), Hfin, dW1.data.data(), fc, h, B, ws.chunk);
        std::fill(ws.dh_head.begin(), ws.dh_head.end(), 0.0);
        gemm_tn_acc(W1.data.data(), ws.dz1.data(), ws.dh_head.data(), fc, h, B, ws.chunk);

        if (!lstm_trainable) continue;

        // BPTT over the chunk.
        std::fill(ws.dH.begin(), ws.dH.end(), 0.0);
        std::fill(ws.dC.begin(), ws.dC.end(), 0.0);
        for (std::size_t t = T; t-- > 0;) {
            const double* fp = &ws.f[t * per_step];
            const double* ip = &ws.i[t * per_step];
            const double* gp = &ws.g[t * per_step];
            const double* op = &ws.o[t * per_step];
            const double* tcp = &ws.tanh_c[t * per_step];
            const double* cprev = t > 0 ? &ws.c[(t - 1) * per_step] : nullptr;
            if (t == T - 1) {
                for (std::size_t idx = 0; idx < per_step; ++idx) ws.dH[idx] += ws.dh_head[idx];
            }
            for (std::size_t r = 0; r < h; ++r) {
                const std::size_t off = r * ws.chunk;
                for (std::size_t b = 0; b < B; ++b) {
                    const std::size_t idx = off + b;
                    const double dh = ws.dH[idx];
                    const double o = op[idx];
                    const double tc = tcp[idx];
                    const double dc = ws.dC[idx] + dh * o * (1.0 - tc * tc);
                    const double f = fp[idx];
                    const double i = ip[idx];
                    const double g = gp[idx];
                    const double cp = cprev ? cprev[idx] : 0.0;
                    ws.dpre[0][idx] = dc * cp * f * (1.0 - f);
                    ws.dpre[1][idx] = dc * g * i * (1.0 - i);
                    ws.dpre[2][idx] = dc * i * (1.0 - g * g);
                    ws.dpre[3][idx] = dh * tc * o * (1.0 - o);
                    ws.dC[idx] = dc * f;
                }
            }
            const double* hprev = t > 0 ? &ws.hs[(t - 1) * per_step] : nullptr;
            std::fill(ws.dH.begin(), ws.dH.end(), 0.0);
            for (int k = 0; k < 4; ++k) {
                const double* dp = ws.dpre[k].data();
                for (std::size_t r = 0; r < h; ++r) {
                    const double* row = dp + r * ws.chunk;
                    double sb = 0.0;
                    double sx = 0.0;
                    for (std::size_t b = 0; b < B; ++b) {
                        sb += row[b];
                        sx += row[b] * windows.windows[begin + b].input[t];
                    }
                    db[k]->data[r] += sb;
                    dwx[k]->data[r] += sx;
                }
                if (hprev) gemm_nt_acc(dp, hprev, dwh[k]->data.data(), h, h, B, ws.chunk);
                gemm_tn_acc(wh[k]->data.data(), dp, ws.dH.data(), h, h, B, ws.chunk);
            }
        }
    }
    return loss_sum / static_cast<double>(total);
}

/// Final hidden states of every window under the current (frozen) LSTM.
inline std::vector<double> lstm_window_features(const LstmRegressor& m,
                                                const WindowSet& windows) {
    const std::size_t h = m.lstm.hidden_size;
    const std::size_t total = windows.count();
    static thread_local BatchWorkspace ws;
    ws.resize(h, m.fc_units, windows.window_len, kChunk);
    std::vector<double> features(h * total);  // column-major per window: [w * h + r]
    for (std::size_t begin = 0; begin < total; begin += kChunk) {
        const std::size_t B = std::min(kChunk, total - begin);
        lstm_chunk_forward(m, windows, begin, B, ws);
        const double* Hfin = &ws.hs[(windows.window_len - 1) * h * ws.chunk];
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t b = 0; b < B; ++b) {
                features[(begin + b) * h + r] = Hfin[r * ws.chunk + b];
            }
        }
    }
    return features;
}

}  // namespace detail

/// Full-batch training: every epoch accumulates gradients over all windows,
/// clips the global norm, and takes one Adam step. Returns per-epoch mean
/// MSE (measured before each update). A NaN loss aborts with TrainingError.
/// When every LSTM tensor is frozen, window features are computed once and
/// only the head is trained, which is mathematically identical.
inline std::vector<double> train_lstm_regressor(LstmRegressor& m, const WindowSet& windows,
                                                const TrainConfig& config) {
    if (windows.count() == 0) throw ArgumentError("train_lstm_regressor: no windows");
    if (windows.window_len != m.window_len) {
        throw ArgumentError("train_lstm_regressor: window_len mismatch " +
                            std::to_string(windows.window_len) + " vs model " +
                            std::to_string(m.window_len));
    }
    if (config.epochs == 0) throw ArgumentError("train_lstm_regressor: epochs must be >= 1");
    AdamState adam(config.adam);
    std::vector<double> history;
    history.reserve(config.epochs);

    const bool frozen_lstm = m.lstm_frozen();
    std::vector<double> features;
    if (frozen_lstm) features = detail::lstm_window_features(m, windows);

    const std::size_t h = m.lstm.hidden_size;
    const std::size_t fc = m.fc_units;
    const std::size_t total = windows.count();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss;
        if (frozen_lstm) {
            // Head-only pass over cached features.
            const Tensor& W1 = m.params.value("head.W1");
            const Tensor& b1 = m.params.value("head.b1");
            const Tensor& W2 = m.params.value("head.W2");
            const Tensor& b2 = m.params.value("head.b2");
            Tensor& dW1 = m.params.grad("head.W1");
            Tensor& db1 = m.params.grad("head.b1");
            Tensor& dW2 = m.params.grad("head.W2");
            Tensor& db2 = m.params.grad("head.b2");
            double loss_sum = 0.0;
            std::vector<double> a1(fc);
            for (std::size_t w = 0; w < total; ++w) {
                const double* hv = &features[w * h];
                for (std::size_t r = 0; r < fc; ++r) {
                    const double* wr = &W1.data[r * h];
                    double s = b1.data[r];
                    for (std::size_t k = 0; k < h; ++k) s += wr[k] * hv[k];
                    a1[r] = tanh_act(s);
                }
                double pred = b2.data[0];
                for (std::size_t r = 0; r < fc; ++r) pred += W2.data[r] * a1[r];
                const double diff = pred - windows.windows[w].target;
                loss_sum += diff * diff;
                const double dpred = 2.0 * diff / static_cast<double>(total);
                db2.data[0] += dpred;
                for (std::size_t r = 0; r < fc; ++r) {
                    const double av = a1[r];
                    dW2.data[r] += dpred * av;
                    const double dz = W2.data[r] * dpred * (1.0 - av * av);
                    db1.data[r] += dz;
                    double* dwr = &dW1.data[r * h];
                    for (std::size_t k = 0; k < h; ++k) dwr[k] += dz * hv[k];
                }
            }
            loss = loss_sum / static_cast<double>(total);
        } else {
            loss = detail::accumulate_full_batch_gradients(m, windows);
        }
        if (!std::isfinite(loss)) {
            throw TrainingError("train_lstm_regressor: non-finite loss", epoch);
        }
        history.push_back(loss);
        if (config.clip_norm > 0.0) clip_global_norm(m.params, config.clip_norm);
        adam_step(m.params, adam);
    }
    m.epochs_run += config.epochs;
    m.final_loss = history.back();
    return history;
}

/// Full-batch DNN training on (scaled input, scaled target) pairs.
inline std::vector<double> train_dnn(DnnBaseline& m, const std::vector<double>& inputs,
                                     const std::vector<double>& targets,
                                     const TrainConfig& config) {
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw ArgumentError("train_dnn: empty or mismatched training data");
    }
    if (config.epochs == 0) throw ArgumentError("train_dnn: epochs must be >= 1");
    AdamState adam(config.adam);
    std::vector<double> history;
    history.reserve(config.epochs);
    const std::size_t n = inputs.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<std::string> wnames, bnames;
    for (std::size_t k = 1; k <= m.layers; ++k) {
        wnames.push_back("fc" + std::to_string(k) + ".W");
        bnames.push_back("fc" + std::to_string(k) + ".b");
    }
    wnames.push_back("out.W");
    bnames.push_back("out.b");

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<Tensor> acts;  // activations entering each layer
            Tensor a = Tensor::vec(1);
            a.data[0] = inputs[s];
            acts.push_back(a);
            for (std::size_t k = 0; k < m.layers; ++k) {
                a = tanh_act(linear_forward(m.params.value(wnames[k]),
                                            m.params.value(bnames[k]), a));
                acts.push_back(a);
            }
            const Tensor out = linear_forward(m.params.value(wnames[m.layers]),
                                              m.params.value(bnames[m.layers]), a);
            const double diff = out.data[0] - targets[s];
            loss_sum += diff * diff;
            Tensor up = Tensor::vec(1);
            up.data[0] = 2.0 * diff * inv_n;
            Tensor dx = linear_backward(m.params.value(wnames[m.layers]), acts[m.layers], up,
                                        m.params.grad(wnames[m.layers]),
                                        m.params.grad(bnames[m.layers]));
            for (std::size_t k = m.layers; k-- > 0;) {
                for (std::size_t j = 0; j < dx.data.size(); ++j) {
                    const double av = acts[k + 1].data[j];
                    dx.data[j] *= (1.0 - av * av);
                }
                dx = linear_backward(m.params.value(wnames[k]), acts[k], dx,
                                     m.params.grad(wnames[k]), m.params.grad(bnames[k]));
            }
        }
        const double loss = loss_sum * inv_n;
        if (!std::isfinite(loss)) throw TrainingError("train_dnn: non-finite loss", epoch);
        history.push_back(loss);
        if (config.clip_norm > 0.0) clip_global_norm(m.params, config.clip_norm);
        adam_step(m.params, adam);
    }
    m.epochs_run += config.epochs;
    m.final_loss = history.back();
    return history;
}

/// Observer invoked before each forecast step with the 1-based step index and
/// the exact input window contents.
using ForecastObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Autoregressive rollout: step k predicts from the last window_len values of
/// (tail ++ predictions so far).
inline std::vector<double> autoregressive_forecast(const LstmRegressor& m,
                                                   std::span<const double> tail,
                                                   std::size_t horizon,
                                                   const ForecastObserver& observer = {}) {
    if (tail.size() != m.window_len) {
        throw ArgumentError("autoregressive_forecast: tail length " +
                            std::to_string(tail.size()) + " != window_len " +
                            std::to_string(m.window_len));
    }
    std::vector<double> buffer(tail.begin(), tail.end());
    std::vector<double> preds;
    preds.reserve(horizon);
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::span<const double> window(buffer.data() + buffer.size() - m.window_len,
                                             m.window_len);
        if (observer) observer(k + 1, window);
        const double p = regressor_forward(m, window);
        preds.push_back(p);
        buffer.push_back(p);
    }
    return preds;
}

// ---------------------------------------------------------------------------
// End-to-end experiment

struct DatasetSpec {
    SnCurveParams curve;
    std::string label;
    std::size_t train_count = 0;
    double noise_std = 0.0;
    std::uint64_t noise_seed = 1;
};

struct ExperimentConfig {
    DatasetSpec axial;
    DatasetSpec torsional;
    ModelConfig model;
    TrainConfig train;
};

struct ForecastResult {
    std::string name;
    bool failed = false;
    std::string error;
    std::vector<double> cycles;     // test-region cycles
    std::vector<double> truth_mpa;  // ground truth over the test region
    std::vector<double> pred_mpa;
    double rmse_mpa = std::numeric_limits<double>::quiet_NaN();
    double rmse_scaled = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> loss_history;
};

struct ExperimentReport {
    SnSeries axial;
    SnSeries torsional;
    ForecastResult source_axial;
    ForecastResult tr_torsional;
    ForecastResult baseline_torsional;
    ForecastResult dnn_axial;
    ForecastResult dnn_torsional;
    // Trained models, for checkpoint emission and invariance checks.
    std::optional<LstmRegressor> source_model;
    std::optional<LstmRegressor> tr_model;
    std::optional<LstmRegressor> baseline_model;
    std::optional<DnnBaseline> dnn_axial_model;
    std::optional<DnnBaseline> dnn_torsional_model;

    std::vector<const ForecastResult*> all() const {
        return {&source_axial, &tr_torsional, &baseline_torsional, &dnn_axial, &dnn_torsional};
    }
};

namespace detail {

inline void forecast_into_result(const LstmRegressor& model, const SnSeries& series,
                                 ForecastResult& out) {
    const ScalerState& scaler = *model.scaler;
    const std::vector<double> scaled = scale_all(scaler, series.stress);
    const std::size_t horizon = series.test_count();
    const std::span<const double> tail(scaled.data() + series.train_count - model.window_len,
                                       model.window_len);
    const std::vector<double> scaled_preds = autoregressive_forecast(model, tail, horizon);
    out.pred_mpa = unscale_all(scaler, scaled_preds);
    out.cycles.assign(series.cycles.begin() + static_cast<std::ptrdiff_t>(series.train_count),
                      series.cycles.end());
    out.truth_mpa.assign(series.stress.begin() + static_cast<std::ptrdiff_t>(series.train_count),
                         series.stress.end());
    out.rmse_mpa = rmse(out.pred_mpa, out.truth_mpa);
    const std::vector<double> scaled_truth(scaled.begin() +
                                               static_cast<std::ptrdiff_t>(series.train_count),
                                           scaled.end());
    out.rmse_scaled = rmse(scaled_preds, scaled_truth);
}

}  // namespace detail

/// Runs the full pipeline: synthesize and split both datasets, train the
/// source LSTM on axial data, transfer to the torsional task with frozen LSTM
/// tensors, train the non-transfer baseline LSTM and the DNN baselines, and
/// forecast each test region. A failure in one model marks that result
/// failed and the rest of the report is still produced.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    ExperimentReport report;
    report.axial = split_series(
        synthesize_series(config.axial.curve, config.axial.label, config.axial.noise_std,
                          config.axial.noise_seed),
        config.axial.train_count);
    report.torsional = split_series(
        synthesize_series(config.torsional.curve, config.torsional.label,
                          config.torsional.noise_std, config.torsional.noise_seed),
        config.torsional.train_count);

    const ScalerState axial_scaler = fit_scaler(report.axial);
    const ScalerState torsional_scaler = fit_scaler(report.torsional);

    const std::vector<double> axial_train_scaled = scale_all(
        axial_scaler, {report.axial.stress.begin(),
                       report.axial.stress.begin() +
                           static_cast<std::ptrdiff_t>(report.axial.train_count)});
    const std::vector<double> torsional_train_scaled = scale_all(
        torsional_scaler, {report.torsional.stress.begin(),
                           report.torsional.stress.begin() +
                               static_cast<std::ptrdiff_t>(report.torsional.train_count)});

    const WindowSet axial_windows = make_windows(axial_train_scaled, config.train.window_len);
    const WindowSet torsional_windows =
        make_windows(torsional_train_scaled, config.train.window_len);

    // Source LSTM on axial data.
    report.source_axial.name = "source_lstm_axial";
    try {
        ModelConfig mc = config.model;
        mc.seed = config.model.seed;
        LstmRegressor source = build_lstm_regressor(mc);
        source.scaler = axial_scaler;
        report.source_axial.loss_history =
            train_lstm_regressor(source, axial_windows, config.train);
        detail::forecast_into_result(source, report.axial, report.source_axial);
        report.source_model = std::move(source);
    } catch (const Error& e) {
        report.source_axial.failed = true;
        report.source_axial.error = e.what();
    }

    // TR-LSTM on torsional data.
    report.tr_torsional.name = "tr_lstm_torsional";
    if (report.source_model) {
        try {
            LstmRegressor tr = transfer_surgery(*report.source_model, config.model.seed + 1);
            tr.scaler = torsional_scaler;
            report.tr_torsional.loss_history =
                train_lstm_regressor(tr, torsional_windows, config.train);
            detail::forecast_into_result(tr, report.torsional, report.tr_torsional);
            report.tr_model = std::move(tr);
        } catch (const Error& e) {
            report.tr_torsional.failed = true;
            report.tr_torsional.error = e.what();
        }
    } else {
        report.tr_torsional.failed = true;
        report.tr_torsional.error = "source model unavailable";
    }

    // Non-transfer baseline LSTM on torsional data.
    report.baseline_torsional.name = "baseline_lstm_torsional";
    try {
        ModelConfig mc = config.model;
        mc.seed = config.model.seed + 2;
        LstmRegressor baseline = build_lstm_regressor(mc);
        baseline.scaler = torsional_scaler;
        report.baseline_torsional.loss_history =
            train_lstm_regressor(baseline, torsional_windows, config.train);
        detail::forecast_into_result(baseline, report.torsional, report.baseline_torsional);
        report.baseline_model = std::move(baseline);
    } catch (const Error& e) {
        report.baseline_torsional.failed = true;
        report.baseline_torsional.error = e.what();
    }

    // DNN baselines, one per dataset: scaled log10(N) -> scaled stress.
    const auto run_dnn = [&](const SnSeries& series, const ScalerState& scaler,
                             std::uint64_t seed, ForecastResult& out,
                             std::optional<DnnBaseline>& slot) {
        try {
            ModelConfig mc = config.model;
            mc.seed = seed;
            DnnBaseline dnn = build_dnn(mc);
            dnn.scaler = scaler;
            dnn.log_n_min = std::log10(series.cycles.front());
            dnn.log_n_max = std::log10(series.cycles[series.train_count - 1]);
            std::vector<double> in(series.train_count), tgt(series.train_count);
            for (std::size_t i = 0; i < series.train_count; ++i) {
                in[i] = dnn.scale_log_n(std::log10(series.cycles[i]));
                tgt[i] = scaler.scale(series.stress[i]);
            }
            out.loss_history = train_dnn(dnn, in, tgt, config.train);
            out.cycles.assign(series.cycles.begin() +
                                  static_cast<std::ptrdiff_t>(series.train_count),
                              series.cycles.end());
            out.truth_mpa.assign(series.stress.begin() +
                                     static_cast<std::ptrdiff_t>(series.train_count),
                                 series.stress.end());
            out.pred_mpa.resize(out.cycles.size());
            std::vector<double> scaled_pred(out.cycles.size()), scaled_truth(out.cycles.size());
            for (std::size_t i = 0; i < out.cycles.size(); ++i) {
                const double p = dnn_forward(dnn, dnn.scale_log_n(std::log10(out.cycles[i])));
                scaled_pred[i] = p;
                scaled_truth[i] = scaler.scale(out.truth_mpa[i]);
                out.pred_mpa[i] = scaler.unscale(p);
            }
            out.rmse_mpa = rmse(out.pred_mpa, out.truth_mpa);
            out.rmse_scaled = rmse(scaled_pred, scaled_truth);
            slot = std::move(dnn);
        } catch (const Error& e) {
            out.failed = true;
            out.error = e.what();
        }
    };
    report.dnn_axial.name = "dnn_axial";
    run_dnn(report.axial, axial_scaler, config.model.seed + 3, report.dnn_axial,
            report.dnn_axial_model);
    report.dnn_torsional.name = "dnn_torsional";
    run_dnn(report.torsional, torsional_scaler, config.model.seed + 4, report.dnn_torsional,
            report.dnn_torsional_model);

    return report;
}

}  // namespace snf
