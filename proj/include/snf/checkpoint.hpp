#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "snf/errors.hpp"
#include "snf/model.hpp"
#include "snf/tensor.hpp"

namespace snf {

inline constexpr int kCheckpointVersion = 1;

/// On-disk model container. Text header:
///
///   SNF-CHECKPOINT 1
///   kind <lstm_regressor|dnn>
///   meta <key> <value>                  (sorted by key)
///   tensor <name> <rows> <cols> <frozen> <byte-offset>
///   payload <total-bytes>
///
/// followed by the concatenated tensors as little-endian IEEE-754 doubles at
/// the stated offsets. Tensor values round-trip bit-exactly.
struct ModelCheckpoint {
    int format_version = kCheckpointVersion;
    std::string model_kind;
    std::vector<std::string> tensor_names;
    std::vector<Tensor> tensors;
    std::vector<bool> frozen;
    std::map<std::string, std::string> meta;

    const Tensor& tensor(const std::string& name) const {
        for (std::size_t i = 0; i < tensor_names.size(); ++i) {
            if (tensor_names[i] == name) return tensors[i];
        }
        throw CheckpointError("checkpoint is missing tensor '" + name + "'");
    }

    std::string meta_at(const std::string& key) const {
        auto it = meta.find(key);
        if (it == meta.end()) throw CheckpointError("checkpoint is missing meta key '" + key + "'");
        return it->second;
    }

    double meta_double(const std::string& key) const { return std::stod(meta_at(key)); }
    std::uint64_t meta_u64(const std::string& key) const { return std::stoull(meta_at(key)); }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
    std::ostringstream header;
    header << "SNF-CHECKPOINT " << ckpt.format_version << "\n";
    header << "kind " << ckpt.model_kind << "\n";
    for (const auto& [k, v] : ckpt.meta) header << "meta " << k << " " << v << "\n";
    std::size_t offset = 0;
    for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
        const Tensor& t = ckpt.tensors[i];
        header << "tensor " << ckpt.tensor_names[i] << " " << t.rows << " " << t.cols << " "
               << (ckpt.frozen[i] ? 1 : 0) << " " << offset << "\n";
        offset += t.size() * sizeof(double);
    }
    header << "payload " << offset << "\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    out << header.str();
    for (const Tensor& t : ckpt.tensors) {
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) throw CheckpointError("write failed for " + path.string());
}

inline ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path.string());
    ModelCheckpoint ckpt;
    std::string line;
    if (!std::getline(in, line)) throw CheckpointError("corrupt checkpoint: empty file");
    {
        std::istringstream ls(line);
        std::string magic;
        int version = -1;
        ls >> magic >> version;
        if (magic != "SNF-CHECKPOINT" || ls.fail()) {
            throw CheckpointError("corrupt checkpoint: bad magic line '" + line + "'");
        }
        if (version != kCheckpointVersion) {
            throw CheckpointError("unsupported checkpoint format_version " +
                                  std::to_string(version) + " (supported: " +
                                  std::to_string(kCheckpointVersion) + ")");
        }
        ckpt.format_version = version;
    }
    std::size_t payload_bytes = 0;
    std::vector<std::size_t> offsets;
    bool saw_payload = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "kind") {
            ls >> ckpt.model_kind;
        } else if (tag == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(0, 1);
            ckpt.meta[key] = value;
        } else if (tag == "tensor") {
            std::string name;
            std::size_t rows = 0, cols = 0, offset = 0;
            int frozen = 0;
            ls >> name >> rows >> cols >> frozen >> offset;
            if (ls.fail() || rows == 0 || cols == 0) {
                throw CheckpointError("corrupt checkpoint: bad tensor line '" + line + "'");
            }
            ckpt.tensor_names.push_back(name);
            ckpt.tensors.emplace_back(rows, cols);
            ckpt.frozen.push_back(frozen != 0);
            offsets.push_back(offset);
        } else if (tag == "payload") {
            ls >> payload_bytes;
            if (ls.fail()) throw CheckpointError("corrupt checkpoint: bad payload line");
            saw_payload = true;
            break;
        } else {
            throw CheckpointError("corrupt checkpoint: unknown header tag '" + tag + "'");
        }
    }
    if (!saw_payload || ckpt.model_kind.empty()) {
        throw CheckpointError("corrupt checkpoint: truncated header");
    }
    std::size_t expected = 0;
    for (const Tensor& t : ckpt.tensors) expected += t.size() * sizeof(double);
    if (expected != payload_bytes) {
        throw CheckpointError("corrupt checkpoint: tensor directory totals " +
                              std::to_string(expected) + " bytes but payload declares " +
                              std::to_string(payload_bytes));
    }
    std::vector<char> payload(payload_bytes);
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<std::size_t>(in.gcount()) != payload_bytes) {
        throw CheckpointError("corrupt checkpoint: payload truncated (" +
                              std::to_string(in.gcount()) + " of " +
                              std::to_string(payload_bytes) + " bytes)");
    }
    for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
        Tensor& t = ckpt.tensors[i];
        const std::size_t bytes = t.size() * sizeof(double);
        if (offsets[i] + bytes > payload_bytes) {
            throw CheckpointError("corrupt checkpoint: tensor '" + ckpt.tensor_names[i] +
                                  "' extends past payload");
        }
        std::memcpy(t.data.data(), payload.data() + offsets[i], bytes);
    }
    return ckpt;
}

// ---------------------------------------------------------------------------
// Model <-> checkpoint

inline ModelCheckpoint to_checkpoint(const LstmRegressor& m) {
    ModelCheckpoint c;
    c.model_kind = "lstm_regressor";
    for (const std::string& name : m.params.names()) {
        c.tensor_names.push_back(name);
        c.tensors.push_back(m.params.value(name));
        c.frozen.push_back(m.params.frozen(name));
    }
    c.meta["hidden_size"] = std::to_string(m.lstm.hidden_size);
    c.meta["input_size"] = std::to_string(m.lstm.input_size);
    c.meta["fc_units"] = std::to_string(m.fc_units);
    c.meta["window_len"] = std::to_string(m.window_len);
    c.meta["seed"] = std::to_string(m.seed);
    c.meta["epochs_run"] = std::to_string(m.epochs_run);
    c.meta["final_loss"] = detail::format_double(m.final_loss);
    if (m.scaler) {
        c.meta["scaler.stress_min"] = detail::format_double(m.scaler->stress_min);
        c.meta["scaler.stress_max"] = detail::format_double(m.scaler->stress_max);
    }
    return c;
}

inline LstmRegressor lstm_regressor_from_checkpoint(const ModelCheckpoint& c) {
    if (c.model_kind != "lstm_regressor") {
        throw CheckpointError("expected kind lstm_regressor, got '" + c.model_kind + "'");
    }
    LstmRegressor m;
    m.lstm.hidden_size = c.meta_u64("hidden_size");
    m.lstm.input_size = c.meta_u64("input_size");
    m.fc_units = c.meta_u64("fc_units");
    m.window_len = c.meta_u64("window_len");
    m.seed = c.meta_u64("seed");
    m.epochs_run = c.meta_u64("epochs_run");
    m.final_loss = c.meta_double("final_loss");
    if (c.meta.count("scaler.stress_min")) {
        m.scaler = ScalerState{c.meta_double("scaler.stress_min"),
                               c.meta_double("scaler.stress_max")};
    }
    for (std::size_t i = 0; i < c.tensors.size(); ++i) {
        m.params.add(c.tensor_names[i], c.tensors[i]);
        m.params.set_frozen(c.tensor_names[i], c.frozen[i]);
    }
    // Shape sanity against the declared sizes.
    const std::size_t h = m.lstm.hidden_size;
    for (char g : kLstmGates) {
        if (m.params.value(m.lstm.wx(g)).rows != h ||
            m.params.value(m.lstm.wh(g)).cols != h) {
            throw CheckpointError("checkpoint tensor shapes inconsistent with hidden_size");
        }
    }
    if (m.params.value("head.W1").cols != h || m.params.value("head.W2").rows != 1) {
        throw CheckpointError("checkpoint head shapes inconsistent");
    }
    return m;
}

inline ModelCheckpoint to_checkpoint(const DnnBaseline& m) {
    ModelCheckpoint c;
    c.model_kind = "dnn";
    for (const std::string& name : m.params.names()) {
        c.tensor_names.push_back(name);
        c.tensors.push_back(m.params.value(name));
        c.frozen.push_back(m.params.frozen(name));
    }
    c.meta["layers"] = std::to_string(m.layers);
    c.meta["units"] = std::to_string(m.units);
    c.meta["seed"] = std::to_string(m.seed);
    c.meta["epochs_run"] = std::to_string(m.epochs_run);
    c.meta["final_loss"] = detail::format_double(m.final_loss);
    c.meta["log_n_min"] = detail::format_double(m.log_n_min);
    c.meta["log_n_max"] = detail::format_double(m.log_n_max);
    if (m.scaler) {
        c.meta["scaler.stress_min"] = detail::format_double(m.scaler->stress_min);
        c.meta["scaler.stress_max"] = detail::format_double(m.scaler->stress_max);
    }
    return c;
}

inline DnnBaseline dnn_from_checkpoint(const ModelCheckpoint& c) {
    if (c.model_kind != "dnn") {
        throw CheckpointError("expected kind dnn, got '" + c.model_kind + "'");
    }
    DnnBaseline m;
    m.layers = c.meta_u64("layers");
    m.units = c.meta_u64("units");
    m.seed = c.meta_u64("seed");
    m.epochs_run = c.meta_u64("epochs_run");
    m.final_loss = c.meta_double("final_loss");
    m.log_n_min = c.meta_double("log_n_min");
    m.log_n_max = c.meta_double("log_n_max");
    if (c.meta.count("scaler.stress_min")) {
        m.scaler = ScalerState{c.meta_double("scaler.stress_min"),
                               c.meta_double("scaler.stress_max")};
    }
    for (std::size_t i = 0; i < c.tensors.size(); ++i) {
        m.params.add(c.tensor_names[i], c.tensors[i]);
        m.params.set_frozen(c.tensor_names[i], c.frozen[i]);
    }
    return m;
}

}  // namespace snf
