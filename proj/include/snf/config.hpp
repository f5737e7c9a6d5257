#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "snf/errors.hpp"
#include "snf/model.hpp"
#include "snf/pipeline.hpp"
#include "snf/sncurve.hpp"

namespace snf {

/// Flat key-value text configuration. Lines are `key = value`; `[section]`
/// headers prefix subsequent keys as `section.key`; `#` starts a comment.
class KeyValueConfig {
public:
    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("unterminated section header", line_no);
                section = line.substr(1, line.size() - 2);
                trim(section);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            trim(key);
            trim(value);
            if (key.empty()) throw ParseError("empty key", line_no);
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a number, got '" + it->second + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a non-negative integer, got '" +
                              it->second + "'");
        }
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static void trim(std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Curve parameter file: flat keys a, b, d, n_min, n_max, n_points, label.
inline SnCurveParams read_curve_params(const std::filesystem::path& path) {
    std::ifstream probe(path);
    if (!probe) throw ConfigError("cannot open parameter file " + path.string());
    probe.close();
    const KeyValueConfig cfg = KeyValueConfig::parse_file(path);
    for (const char* key : {"a", "b", "d", "n_min", "n_max", "n_points"}) {
        if (!cfg.has(key)) {
            throw ConfigError("parameter file " + path.string() + " is missing key '" + key +
                              "'");
        }
    }
    SnCurveParams p;
    p.a = cfg.get_double("a", 0.0);
    p.b = cfg.get_double("b", 0.0);
    p.d = cfg.get_double("d", 0.0);
    p.n_min = cfg.get_double("n_min", 0.0);
    p.n_max = cfg.get_double("n_max", 0.0);
    p.n_points = static_cast<std::size_t>(cfg.get_u64("n_points", 0));
    p.label = cfg.get_string("label", "");
    p.validate();
    return p;
}

inline void write_curve_params(const SnCurveParams& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
        out << buf;
    };
    put("a", p.a);
    put("b", p.b);
    put("d", p.d);
    put("n_min", p.n_min);
    put("n_max", p.n_max);
    out << "n_points = " << p.n_points << "\n";
    out << "label = " << p.label << "\n";
}

/// Everything a full experiment needs, assembled from a KeyValueConfig with
/// the architecture and schedule defaults used throughout.
struct AppConfig {
    std::string axial_params_file = "data/params_axial.txt";
    std::string torsional_params_file = "data/params_torsional.txt";
    std::size_t train_count_axial = 600;
    std::size_t train_count_torsional = 300;
    double noise_std = 0.0;
    std::uint64_t noise_seed = 1;
    std::size_t n_points_override = 0;  // 0 = use the parameter files
    ModelConfig model;
    TrainConfig train;

    static AppConfig from_config(const KeyValueConfig& cfg) {
        AppConfig a;
        a.axial_params_file = cfg.get_string("data.axial_params", a.axial_params_file);
        a.torsional_params_file =
            cfg.get_string("data.torsional_params", a.torsional_params_file);
        a.train_count_axial = static_cast<std::size_t>(
            cfg.get_u64("data.train_count_axial", a.train_count_axial));
        a.train_count_torsional = static_cast<std::size_t>(
            cfg.get_u64("data.train_count_torsional", a.train_count_torsional));
        a.noise_std = cfg.get_double("data.noise_std", a.noise_std);
        a.noise_seed = cfg.get_u64("data.noise_seed", a.noise_seed);
        a.n_points_override =
            static_cast<std::size_t>(cfg.get_u64("data.n_points", a.n_points_override));
        a.model.lstm_hidden =
            static_cast<std::size_t>(cfg.get_u64("model.lstm_hidden", a.model.lstm_hidden));
        a.model.fc_units =
            static_cast<std::size_t>(cfg.get_u64("model.fc_units", a.model.fc_units));
        a.model.window_len =
            static_cast<std::size_t>(cfg.get_u64("model.window_len", a.model.window_len));
        a.model.dnn_layers =
            static_cast<std::size_t>(cfg.get_u64("model.dnn_layers", a.model.dnn_layers));
        a.model.dnn_units =
            static_cast<std::size_t>(cfg.get_u64("model.dnn_units", a.model.dnn_units));
        a.model.seed = cfg.get_u64("train.seed", a.model.seed);
        a.train.window_len = a.model.window_len;
        a.train.epochs = static_cast<std::size_t>(cfg.get_u64("train.epochs", a.train.epochs));
        a.train.seed = a.model.seed;
        a.train.clip_norm = cfg.get_double("train.clip_norm", a.train.clip_norm);
        a.train.adam.lr = cfg.get_double("train.learning_rate", a.train.adam.lr);
        a.train.adam.beta1 = cfg.get_double("train.beta1", a.train.adam.beta1);
        a.train.adam.beta2 = cfg.get_double("train.beta2", a.train.adam.beta2);
        a.train.adam.eps = cfg.get_double("train.epsilon", a.train.adam.eps);
        return a;
    }
};

}  // namespace snf
