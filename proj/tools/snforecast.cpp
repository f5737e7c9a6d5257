// snforecast: synthetic S-N curve forecasting toolkit.
//
// Subcommands cover each pipeline stage (data generation, source training,
// transfer, baselines, forecasting, evaluation, plotting); run-all is the
// literal sequential composition of the stage functions, so its artifacts are
// byte-identical to running the stages one by one.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "snf/checkpoint.hpp"
#include "snf/config.hpp"
#include "snf/model.hpp"
#include "snf/pipeline.hpp"
#include "snf/sncurve.hpp"
#include "snf/svg.hpp"

namespace fs = std::filesystem;
using namespace snf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CliState {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool verbose = false;
    std::string model = "all";
    long long horizon = -1;  // -1: full test region
};

void note(const CliState& cli, const std::string& msg) {
    if (cli.verbose) std::cerr << "[snforecast] " << msg << "\n";
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- configuration -----------------------------------------------------------

AppConfig load_app_config(const CliState& cli) {
    AppConfig app;
    if (!cli.config_path.empty()) {
        app = AppConfig::from_config(KeyValueConfig::parse_file(cli.config_path));
        // Relative parameter-file paths resolve against the config file's
        // directory so a config works from any working directory.
        const fs::path base = fs::path(cli.config_path).parent_path();
        for (std::string* p : {&app.axial_params_file, &app.torsional_params_file}) {
            if (!fs::path(*p).is_absolute()) *p = (base / *p).string();
        }
    }
    if (cli.seed_set) {
        app.model.seed = cli.seed;
        app.train.seed = cli.seed;
    }
    app.train.window_len = app.model.window_len;
    return app;
}

fs::path ensure_out_dir(const CliState& cli) {
    fs::path out = cli.out_dir;
    fs::create_directories(out);
    return out;
}

// --- dataset artifacts -------------------------------------------------------

struct DatasetFiles {
    fs::path csv;
    fs::path meta;
};

DatasetFiles dataset_files(const fs::path& out, const std::string& name) {
    return {out / (name + ".csv"), out / (name + "_meta.txt")};
}

void write_dataset(const fs::path& out, const std::string& name, const SnSeries& series,
                   const SnCurveParams& params, double noise_std, std::uint64_t noise_seed) {
    const DatasetFiles files = dataset_files(out, name);
    write_series_csv(series, files.csv);
    std::ofstream meta(files.meta, std::ios::binary);
    if (!meta) throw ConfigError("cannot open " + files.meta.string() + " for writing");
    meta << "label = " << params.label << "\n";
    meta << "train_count = " << series.train_count << "\n";
    meta << "noise_std = " << fmt17(noise_std) << "\n";
    meta << "noise_seed = " << noise_seed << "\n";
    meta << "a = " << fmt17(params.a) << "\n";
    meta << "b = " << fmt17(params.b) << "\n";
    meta << "d = " << fmt17(params.d) << "\n";
    meta << "n_min = " << fmt17(params.n_min) << "\n";
    meta << "n_max = " << fmt17(params.n_max) << "\n";
    meta << "n_points = " << params.n_points << "\n";
}

SnSeries load_dataset(const fs::path& out, const std::string& name) {
    const DatasetFiles files = dataset_files(out, name);
    if (!fs::exists(files.csv)) {
        throw ConfigError("missing dataset file " + files.csv.string() +
                          " (run `snforecast generate` first)");
    }
    if (!fs::exists(files.meta)) {
        throw ConfigError("missing dataset sidecar " + files.meta.string());
    }
    SnSeries s = read_series_csv(files.csv);
    const KeyValueConfig meta = KeyValueConfig::parse_file(files.meta);
    const std::size_t train_count =
        static_cast<std::size_t>(meta.get_u64("train_count", 0));
    return split_series(s, train_count);
}

void write_loss_csv(const fs::path& path, const std::vector<double>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out << i << "," << fmt17(history[i]) << "\n";
    }
}

// --- model registry ----------------------------------------------------------

struct ModelInfo {
    const char* name;
    const char* dataset;
    bool is_dnn;
};

constexpr ModelInfo kModels[] = {
    {"source_lstm", "axial", false},     {"tr_lstm", "torsional", false},
    {"baseline_lstm", "torsional", false}, {"dnn_axial", "axial", true},
    {"dnn_torsional", "torsional", true},
};

const ModelInfo& model_info(const std::string& name) {
    for (const ModelInfo& m : kModels) {
        if (name == m.name) return m;
    }
    throw ArgumentError("unknown model '" + name +
                        "' (expected source_lstm, tr_lstm, baseline_lstm, dnn_axial, "
                        "dnn_torsional, or all)");
}

fs::path checkpoint_path(const fs::path& out, const std::string& name) {
    return out / (name + ".ckpt");
}

ModelCheckpoint load_checkpoint_or_usage_error(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("missing checkpoint file " + path.string());
    }
    return load_checkpoint(path);
}

// --- stages ------------------------------------------------------------------

void stage_generate(const AppConfig& app, const fs::path& out, const CliState& cli) {
    struct Item {
        const std::string* file;
        const char* name;
        std::size_t train_count;
        std::uint64_t noise_seed;
    };
    const Item items[] = {
        {&app.axial_params_file, "axial", app.train_count_axial, app.noise_seed},
        {&app.torsional_params_file, "torsional", app.train_count_torsional,
         app.noise_seed + 1},
    };
    for (const Item& item : items) {
        SnCurveParams params = read_curve_params(*item.file);
        if (app.n_points_override > 0) params.n_points = app.n_points_override;
        const SnSeries series = split_series(
            synthesize_series(params, params.label, app.noise_std, item.noise_seed),
            std::min(item.train_count, params.n_points));
        write_dataset(out, item.name, series, params, app.noise_std, item.noise_seed);
        note(cli, std::string("wrote ") + item.name + ".csv (" +
                      std::to_string(series.size()) + " rows, train " +
                      std::to_string(series.train_count) + ")");
    }
}

void train_lstm_stage(const AppConfig& app, const fs::path& out, const CliState& cli,
                      const std::string& name, LstmRegressor model) {
    const ModelInfo& info = model_info(name);
    const SnSeries series = load_dataset(out, info.dataset);
    const ScalerState scaler = fit_scaler(series);
    const std::vector<double> train_scaled = scale_all(
        scaler, {series.stress.begin(),
                 series.stress.begin() + static_cast<std::ptrdiff_t>(series.train_count)});
    model.scaler = scaler;
    const std::vector<double> history =
        train_lstm_regressor(model, make_windows(train_scaled, app.train.window_len),
                             app.train);
    save_checkpoint(to_checkpoint(model), checkpoint_path(out, name));
    write_loss_csv(out / (name + "_loss.csv"), history);
    note(cli, name + " trained for " + std::to_string(history.size()) +
                  " epochs, final loss " + fmt17(history.back()));
}

void stage_train_source(const AppConfig& app, const fs::path& out, const CliState& cli) {
    ModelConfig mc = app.model;
    train_lstm_stage(app, out, cli, "source_lstm", build_lstm_regressor(mc));
}

void stage_transfer(const AppConfig& app, const fs::path& out, const CliState& cli) {
    const LstmRegressor source = lstm_regressor_from_checkpoint(
        load_checkpoint_or_usage_error(checkpoint_path(out, "source_lstm")));
    train_lstm_stage(app, out, cli, "tr_lstm",
                     transfer_surgery(source, app.model.seed + 1));
}

void stage_train_baseline(const AppConfig& app, const fs::path& out, const CliState& cli) {
    ModelConfig mc = app.model;
    mc.seed = app.model.seed + 2;
    train_lstm_stage(app, out, cli, "baseline_lstm", build_lstm_regressor(mc));
}

void stage_train_dnn(const AppConfig& app, const fs::path& out, const CliState& cli) {
    struct Item {
        const char* name;
        std::uint64_t seed;
    };
    for (const Item& item : {Item{"dnn_axial", app.model.seed + 3},
                             Item{"dnn_torsional", app.model.seed + 4}}) {
        const ModelInfo& info = model_info(item.name);
        const SnSeries series = load_dataset(out, info.dataset);
        const ScalerState scaler = fit_scaler(series);
        ModelConfig mc = app.model;
        mc.seed = item.seed;
        DnnBaseline dnn = build_dnn(mc);
        dnn.scaler = scaler;
        dnn.log_n_min = std::log10(series.cycles.front());
        dnn.log_n_max = std::log10(series.cycles[series.train_count - 1]);
        std::vector<double> in(series.train_count), tgt(series.train_count);
        for (std::size_t i = 0; i < series.train_count; ++i) {
            in[i] = dnn.scale_log_n(std::log10(series.cycles[i]));
            tgt[i] = scaler.scale(series.stress[i]);
        }
        const std::vector<double> history = train_dnn(dnn, in, tgt, app.train);
        save_checkpoint(to_checkpoint(dnn), checkpoint_path(out, item.name));
        write_loss_csv(out / (std::string(item.name) + "_loss.csv"), history);
        note(cli, std::string(item.name) + " trained, final loss " + fmt17(history.back()));
    }
}

struct Predictions {
    std::vector<double> cycles;
    std::vector<double> truth_mpa;
    std::vector<double> pred_mpa;
    std::vector<double> truth_scaled;
    std::vector<double> pred_scaled;
};

Predictions predict_test_region(const std::string& name, const ModelCheckpoint& ckpt,
                                const SnSeries& series, std::size_t horizon) {
    const ModelInfo& info = model_info(name);
    if (horizon > series.test_count()) {
        throw ArgumentError("horizon " + std::to_string(horizon) +
                            " exceeds test region size " +
                            std::to_string(series.test_count()));
    }
    Predictions p;
    p.cycles.assign(series.cycles.begin() + static_cast<std::ptrdiff_t>(series.train_count),
                    series.cycles.begin() +
                        static_cast<std::ptrdiff_t>(series.train_count + horizon));
    p.truth_mpa.assign(series.stress.begin() + static_cast<std::ptrdiff_t>(series.train_count),
                       series.stress.begin() +
                           static_cast<std::ptrdiff_t>(series.train_count + horizon));
    if (info.is_dnn) {
        const DnnBaseline dnn = dnn_from_checkpoint(ckpt);
        if (!dnn.scaler) throw CheckpointError("checkpoint " + std::string(name) +
                                               " has no scaler state");
        for (std::size_t i = 0; i < horizon; ++i) {
            const double s = dnn_forward(dnn, dnn.scale_log_n(std::log10(p.cycles[i])));
            p.pred_scaled.push_back(s);
            p.pred_mpa.push_back(dnn.scaler->unscale(s));
            p.truth_scaled.push_back(dnn.scaler->scale(p.truth_mpa[i]));
        }
    } else {
        const LstmRegressor model = lstm_regressor_from_checkpoint(ckpt);
        if (!model.scaler) throw CheckpointError("checkpoint " + std::string(name) +
                                                 " has no scaler state");
        if (series.train_count < model.window_len) {
            throw TrainingError("training region shorter than model window", 0);
        }
        const std::vector<double> scaled = scale_all(*model.scaler, series.stress);
        const std::span<const double> tail(
            scaled.data() + series.train_count - model.window_len, model.window_len);
        p.pred_scaled = autoregressive_forecast(model, tail, horizon);
        p.pred_mpa = unscale_all(*model.scaler, p.pred_scaled);
        p.truth_scaled.assign(scaled.begin() + static_cast<std::ptrdiff_t>(series.train_count),
                              scaled.begin() +
                                  static_cast<std::ptrdiff_t>(series.train_count + horizon));
    }
    return p;
}

std::vector<std::string> selected_models(const CliState& cli) {
    std::vector<std::string> names;
    if (cli.model == "all") {
        for (const ModelInfo& m : kModels) {
            names.push_back(m.name);
        }
    } else {
        model_info(cli.model);  // validates
        names.push_back(cli.model);
    }
    return names;
}

void stage_forecast(const AppConfig&, const fs::path& out, const CliState& cli) {
    for (const std::string& name : selected_models(cli)) {
        const ModelInfo& info = model_info(name);
        const SnSeries series = load_dataset(out, info.dataset);
        const std::size_t horizon =
            cli.horizon < 0 ? series.test_count() : static_cast<std::size_t>(cli.horizon);
        const Predictions p = predict_test_region(
            name, load_checkpoint_or_usage_error(checkpoint_path(out, name)), series,
            horizon);
        const fs::path path = out / (name + "_pred.csv");
        std::ofstream csv(path, std::ios::binary);
        if (!csv) throw ConfigError("cannot open " + path.string() + " for writing");
        csv << "cycles,stress_true_mpa,stress_pred_mpa\n";
        char buf[128];
        for (std::size_t i = 0; i < p.cycles.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", p.cycles[i],
                          p.truth_mpa[i], p.pred_mpa[i]);
            csv << buf;
        }
        note(cli, name + "_pred.csv written (" + std::to_string(p.cycles.size()) + " rows)");
    }
}

/// One-step-ahead RMSE on the training region (every training window against
/// its true next value), in both MPa and scaled units.
struct TrainFit {
    double rmse_mpa;
    double rmse_scaled;
};

TrainFit training_region_fit(const std::string& name, const ModelCheckpoint& ckpt,
                             const SnSeries& series, std::size_t window_len) {
    const ModelInfo& info = model_info(name);
    std::vector<double> pred_scaled, truth_scaled, pred_mpa, truth_mpa;
    if (info.is_dnn) {
        const DnnBaseline dnn = dnn_from_checkpoint(ckpt);
        for (std::size_t i = 0; i < series.train_count; ++i) {
            const double s = dnn_forward(dnn, dnn.scale_log_n(std::log10(series.cycles[i])));
            pred_scaled.push_back(s);
            pred_mpa.push_back(dnn.scaler->unscale(s));
            truth_mpa.push_back(series.stress[i]);
            truth_scaled.push_back(dnn.scaler->scale(series.stress[i]));
        }
    } else {
        const LstmRegressor model = lstm_regressor_from_checkpoint(ckpt);
        const std::vector<double> train_scaled = scale_all(
            *model.scaler,
            {series.stress.begin(),
             series.stress.begin() + static_cast<std::ptrdiff_t>(series.train_count)});
        const WindowSet windows = make_windows(train_scaled, window_len);
        for (const Window& w : windows.windows) {
            const double s = regressor_forward(model, w.input);
            pred_scaled.push_back(s);
            pred_mpa.push_back(model.scaler->unscale(s));
            truth_scaled.push_back(w.target);
            truth_mpa.push_back(model.scaler->unscale(w.target));
        }
    }
    return {rmse(pred_mpa, truth_mpa), rmse(pred_scaled, truth_scaled)};
}

void stage_evaluate(const AppConfig& app, const fs::path& out, const CliState& cli) {
    for (const std::string& name : selected_models(cli)) {
        const ModelInfo& info = model_info(name);
        const SnSeries series = load_dataset(out, info.dataset);
        const ModelCheckpoint ckpt =
            load_checkpoint_or_usage_error(checkpoint_path(out, name));
        const Predictions p = predict_test_region(name, ckpt, series, series.test_count());
        const TrainFit train_fit =
            training_region_fit(name, ckpt, series, app.train.window_len);
        const fs::path path = out / (name + "_summary.txt");
        std::ofstream sum(path, std::ios::binary);
        if (!sum) throw ConfigError("cannot open " + path.string() + " for writing");
        sum << "model " << name << "\n";
        sum << "dataset " << info.dataset << "\n";
        sum << "train_rmse_mpa " << fmt17(train_fit.rmse_mpa) << "\n";
        sum << "train_rmse_scaled " << fmt17(train_fit.rmse_scaled) << "\n";
        sum << "test_rmse_mpa " << fmt17(rmse(p.pred_mpa, p.truth_mpa)) << "\n";
        sum << "test_rmse_scaled " << fmt17(rmse(p.pred_scaled, p.truth_scaled)) << "\n";
        note(cli, name + "_summary.txt written");
    }
}

// --- plotting (from CSV artifacts only) --------------------------------------

std::vector<std::pair<double, double>> read_loss_csv(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("missing loss file " + path.string());
    std::ifstream in(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<double, double>> points;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "epoch,loss") throw ParseError("expected header 'epoch,loss'", 1);
            continue;
        }
        if (line.empty()) continue;
        double epoch, loss;
        if (std::sscanf(line.c_str(), "%lf,%lf", &epoch, &loss) != 2) {
            throw ParseError("malformed loss row in " + path.string(), line_no);
        }
        points.emplace_back(epoch, loss);
    }
    if (points.empty()) {
        throw ParseError("loss file " + path.string() + " has no data rows", line_no);
    }
    return points;
}

struct PredCsv {
    std::vector<double> cycles, truth, pred;
};

PredCsv read_pred_csv(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("missing prediction file " + path.string());
    std::ifstream in(path);
    std::string line;
    std::size_t line_no = 0;
    PredCsv out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "cycles,stress_true_mpa,stress_pred_mpa") {
                throw ParseError("unexpected prediction header", 1);
            }
            continue;
        }
        if (line.empty()) continue;
        double n, t, p;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &n, &t, &p) != 3) {
            throw ParseError("malformed prediction row in " + path.string(), line_no);
        }
        out.cycles.push_back(n);
        out.truth.push_back(t);
        out.pred.push_back(p);
    }
    return out;
}

SvgSeries loss_series(const fs::path& out, const std::string& name, const char* color) {
    SvgSeries s;
    s.label = name;
    s.color = color;
    s.points = read_loss_csv(out / (name + "_loss.csv"));
    return s;
}

SvgSeries pred_series(const fs::path& out, const std::string& name, const char* color) {
    SvgSeries s;
    s.label = name;
    s.color = color;
    s.dashed = true;
    const PredCsv csv = read_pred_csv(out / (name + "_pred.csv"));
    for (std::size_t i = 0; i < csv.cycles.size(); ++i) {
        s.points.emplace_back(std::log10(csv.cycles[i]), csv.pred[i]);
    }
    return s;
}

void stage_plot(const AppConfig&, const fs::path& out, const CliState& cli) {
    // Loss curves.
    {
        SvgChartOptions opt;
        opt.title = "Training loss, axial models";
        opt.x_label = "epoch";
        opt.y_label = "mean squared error (scaled units)";
        write_line_chart(out / "loss_axial.svg",
                         {loss_series(out, "source_lstm", "#1f77b4"),
                          loss_series(out, "dnn_axial", "#d62728")},
                         opt);
        opt.title = "Training loss, torsional models";
        write_line_chart(out / "loss_torsional.svg",
                         {loss_series(out, "tr_lstm", "#2ca02c"),
                          loss_series(out, "baseline_lstm", "#ff7f0e"),
                          loss_series(out, "dnn_torsional", "#d62728")},
                         opt);
    }
    // S-N overlays.
    const auto overlay = [&](const char* dataset, const std::vector<SvgSeries>& preds,
                             const fs::path& path) {
        const SnSeries series = load_dataset(out, dataset);
        SvgSeries truth;
        truth.label = std::string(dataset) + " truth";
        truth.color = "#000000";
        for (std::size_t i = 0; i < series.size(); ++i) {
            truth.points.emplace_back(std::log10(series.cycles[i]), series.stress[i]);
        }
        std::vector<SvgSeries> all{truth};
        all.insert(all.end(), preds.begin(), preds.end());
        SvgChartOptions opt;
        opt.title = std::string("S-N forecast, ") + dataset + " data";
        opt.x_label = "log10 N (cycles)";
        opt.y_label = "stress amplitude (MPa)";
        opt.vline_x = std::log10(series.cycles[series.train_count - 1]);
        opt.vline_label = "train | test";
        write_line_chart(path, all, opt);
    };
    overlay("axial",
            {pred_series(out, "source_lstm", "#1f77b4"),
             pred_series(out, "dnn_axial", "#d62728")},
            out / "sn_axial.svg");
    overlay("torsional",
            {pred_series(out, "tr_lstm", "#2ca02c"),
             pred_series(out, "baseline_lstm", "#ff7f0e"),
             pred_series(out, "dnn_torsional", "#d62728")},
            out / "sn_torsional.svg");
    note(cli, "wrote loss_axial.svg, loss_torsional.svg, sn_axial.svg, sn_torsional.svg");
}

void stage_report(const AppConfig&, const fs::path& out, const CliState& cli) {
    std::map<std::string, std::map<std::string, std::string>> summaries;
    for (const ModelInfo& m : kModels) {
        const fs::path path = out / (std::string(m.name) + "_summary.txt");
        if (!fs::exists(path)) throw ConfigError("missing summary " + path.string());
        std::ifstream in(path);
        std::string key, value, line;
        while (std::getline(in, line)) {
            const auto sp = line.find(' ');
            if (sp == std::string::npos) continue;
            summaries[m.name][line.substr(0, sp)] = line.substr(sp + 1);
        }
    }
    const auto test_rmse = [&](const char* name) {
        return std::stod(summaries.at(name).at("test_rmse_mpa"));
    };
    const fs::path path = out / "report.txt";
    std::ofstream rep(path, std::ios::binary);
    if (!rep) throw ConfigError("cannot open " + path.string() + " for writing");
    rep << "sn-forecast experiment report\n";
    for (const ModelInfo& m : kModels) {
        rep << "\nmodel " << m.name << "\n";
        rep << "  dataset " << m.dataset << "\n";
        for (const char* key : {"train_rmse_mpa", "train_rmse_scaled", "test_rmse_mpa",
                                "test_rmse_scaled"}) {
            rep << "  " << key << " " << summaries.at(m.name).at(key) << "\n";
        }
    }
    rep << "\nordering tr_lstm_lt_baseline_lstm "
        << (test_rmse("tr_lstm") < test_rmse("baseline_lstm") ? "true" : "false") << "\n";
    rep << "ordering baseline_lstm_lt_dnn_torsional "
        << (test_rmse("baseline_lstm") < test_rmse("dnn_torsional") ? "true" : "false")
        << "\n";
    note(cli, "report.txt written");
}

void stage_run_all(const AppConfig& app, const fs::path& out, const CliState& cli) {
    CliState all = cli;
    all.model = "all";
    all.horizon = -1;
    stage_generate(app, out, all);
    stage_train_source(app, out, all);
    stage_transfer(app, out, all);
    stage_train_baseline(app, out, all);
    stage_train_dnn(app, out, all);
    stage_forecast(app, out, all);
    stage_evaluate(app, out, all);
    stage_plot(app, out, all);
    stage_report(app, out, all);
}

}  // namespace

int main(int argc, char** argv) {
    CliState cli;
    const char* env_out = std::getenv("SN_FORECAST_OUT");
    cli.out_dir = env_out != nullptr ? env_out : "out";

    CLI::App app{"Synthetic S-N curve forecasting toolkit"};
    app.require_subcommand(1);

    using Stage = void (*)(const AppConfig&, const fs::path&, const CliState&);
    std::vector<std::pair<CLI::App*, Stage>> stages;
    const auto add_sub = [&](const char* name, const char* desc, Stage fn,
                             bool has_model_opts) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", cli.config_path, "key=value configuration file");
        sub->add_option("--out", cli.out_dir, "output directory (env SN_FORECAST_OUT)");
        sub->add_option("--seed", cli.seed, "seed override")
            ->each([&](const std::string&) { cli.seed_set = true; });
        sub->add_flag("--verbose", cli.verbose, "progress output on stderr");
        if (has_model_opts) {
            sub->add_option("--model", cli.model,
                            "model name or 'all' (source_lstm, tr_lstm, baseline_lstm, "
                            "dnn_axial, dnn_torsional)");
            sub->add_option("--horizon", cli.horizon,
                            "forecast steps (default: full test region)");
        }
        stages.emplace_back(sub, fn);
    };
    add_sub("generate", "synthesize the axial and torsional datasets", stage_generate,
            false);
    add_sub("train-source", "train the source LSTM on the axial training region",
            stage_train_source, false);
    add_sub("transfer", "transfer surgery + head training on torsional data",
            stage_transfer, false);
    add_sub("train-baseline", "train the non-transfer LSTM on torsional data",
            stage_train_baseline, false);
    add_sub("train-dnn", "train the feed-forward baselines", stage_train_dnn, false);
    add_sub("forecast", "autoregressive forecast over the test region", stage_forecast,
            true);
    add_sub("evaluate", "train/test RMSE summaries", stage_evaluate, true);
    add_sub("plot", "SVG charts from the CSV artifacts", stage_plot, false);
    add_sub("run-all", "all stages in sequence", stage_run_all, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const AppConfig config = load_app_config(cli);
        const fs::path out = ensure_out_dir(cli);
        for (const auto& [sub, fn] : stages) {
            if (sub->parsed()) fn(config, out, cli);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
