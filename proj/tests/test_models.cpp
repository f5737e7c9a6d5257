#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "snf/checkpoint.hpp"
#include "snf/model.hpp"
#include "snf/pipeline.hpp"
#include "snf/rng.hpp"

namespace fs = std::filesystem;
using namespace snf;

namespace {

std::vector<double> random_window(std::size_t len, Rng& rng) {
    std::vector<double> w(len);
    for (double& v : w) v = rng.uniform(0.0, 1.0);
    return w;
}

}  // namespace

TEST(BuildLstmRegressor, DefaultArchitecture) {
    const LstmRegressor m = build_lstm_regressor(ModelConfig{});
    EXPECT_EQ(m.lstm.hidden_size, 64u);
    EXPECT_EQ(m.fc_units, 64u);
    EXPECT_EQ(m.window_len, 50u);
    // 4(h*i + h*h + h) for the cell, fc*h + fc + fc + 1 for the head.
    const std::size_t expected = 4 * (64 * 1 + 64 * 64 + 64) + (64 * 64 + 64 + 64 + 1);
    EXPECT_EQ(m.params.total_coordinates(), expected);
}

TEST(BuildLstmRegressor, SeededDeterminism) {
    ModelConfig cfg;
    cfg.seed = 1234;
    const LstmRegressor a = build_lstm_regressor(cfg);
    const LstmRegressor b = build_lstm_regressor(cfg);
    for (const std::string& name : a.params.names()) {
        EXPECT_EQ(a.params.value(name).data, b.params.value(name).data);
    }
    cfg.seed = 1235;
    const LstmRegressor c = build_lstm_regressor(cfg);
    EXPECT_NE(a.params.value("lstm.W_fx").data, c.params.value("lstm.W_fx").data);
}

TEST(BuildLstmRegressor, RejectsZeroSizes) {
    ModelConfig cfg;
    cfg.lstm_hidden = 0;
    EXPECT_THROW(build_lstm_regressor(cfg), ArgumentError);
    ModelConfig cfg2;
    cfg2.dnn_units = 0;
    EXPECT_THROW(build_dnn(cfg2), ArgumentError);
}

TEST(RegressorForward, ZeroWeightsOutputHeadBias) {
    LstmRegressor m = build_lstm_regressor(ModelConfig{});
    for (const std::string& name : m.params.names()) m.params.value(name).fill(0.0);
    m.params.value("head.b2").data[0] = 0.375;
    Rng rng(5);
    EXPECT_DOUBLE_EQ(regressor_forward(m, random_window(50, rng)), 0.375);
}

TEST(RegressorForward, GoldenValueStableAcrossRuns) {
    ModelConfig cfg;
    cfg.lstm_hidden = 2;
    cfg.fc_units = 2;
    cfg.window_len = 4;
    cfg.seed = 9;
    const LstmRegressor m = build_lstm_regressor(cfg);
    const std::vector<double> window{0.1, 0.4, 0.7, 0.2};
    const double out1 = regressor_forward(m, window);
    const double out2 = regressor_forward(m, window);
    EXPECT_EQ(out1, out2);
    // Golden regression value captured from the seeded build (seed 9).
    EXPECT_NEAR(out1, 0.60748077570615222, 1e-12);
}

TEST(RegressorForward, WrongWindowLengthRejected) {
    const LstmRegressor m = build_lstm_regressor(ModelConfig{});
    Rng rng(5);
    EXPECT_THROW(regressor_forward(m, random_window(49, rng)), ArgumentError);
}

TEST(TransferSurgery, CopiesAndFreezesLstmTensors) {
    ModelConfig cfg;
    cfg.seed = 11;
    const LstmRegressor source = build_lstm_regressor(cfg);
    const LstmRegressor target = transfer_surgery(source, 99);
    for (const std::string& name : source.params.names()) {
        if (name.rfind("lstm.", 0) == 0) {
            EXPECT_EQ(target.params.value(name).data, source.params.value(name).data);
            EXPECT_TRUE(target.params.frozen(name));
        } else {
            EXPECT_FALSE(target.params.frozen(name));
        }
    }
    EXPECT_NE(target.params.value("head.W1").data, source.params.value("head.W1").data);
    EXPECT_FALSE(target.scaler.has_value());
}

TEST(TransferSurgery, FrozenTensorsSurviveOptimizerSteps) {
    ModelConfig cfg;
    cfg.seed = 21;
    cfg.window_len = 8;
    LstmRegressor source = build_lstm_regressor(cfg);
    LstmRegressor target = transfer_surgery(source, 22);
    std::vector<std::vector<double>> frozen_before;
    for (const std::string& name : target.params.names()) {
        if (name.rfind("lstm.", 0) == 0) frozen_before.push_back(target.params.value(name).data);
    }
    // A few real training steps on the target head.
    Rng rng(23);
    std::vector<double> series(40);
    for (double& v : series) v = rng.uniform(0.0, 1.0);
    TrainConfig tc;
    tc.window_len = 8;
    tc.epochs = 5;
    train_lstm_regressor(target, make_windows(series, 8), tc);
    std::size_t idx = 0;
    for (const std::string& name : target.params.names()) {
        if (name.rfind("lstm.", 0) == 0) {
            EXPECT_EQ(target.params.value(name).data, frozen_before[idx++]) << name;
        }
    }
}

TEST(DnnBaseline, ArchitectureAndForward) {
    const DnnBaseline m = build_dnn(ModelConfig{});
    EXPECT_EQ(m.layers, 4u);
    EXPECT_EQ(m.units, 32u);
    // 1->32, 3x 32->32, 32->1 plus biases
    const std::size_t expected =
        (32 * 1 + 32) + 3 * (32 * 32 + 32) + (1 * 32 + 1);
    EXPECT_EQ(m.params.total_coordinates(), expected);
    EXPECT_TRUE(std::isfinite(dnn_forward(m, 0.5)));
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
    ModelConfig cfg;
    cfg.seed = 31;
    LstmRegressor m = build_lstm_regressor(cfg);
    m.scaler = ScalerState{120.5, 610.25};
    m.epochs_run = 17;
    m.final_loss = 3.25e-4;
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_roundtrip.bin";
    save_checkpoint(to_checkpoint(m), path);
    const LstmRegressor r = lstm_regressor_from_checkpoint(load_checkpoint(path));
    EXPECT_EQ(r.epochs_run, 17u);
    EXPECT_DOUBLE_EQ(r.final_loss, 3.25e-4);
    ASSERT_TRUE(r.scaler.has_value());
    EXPECT_DOUBLE_EQ(r.scaler->stress_min, 120.5);
    for (const std::string& name : m.params.names()) {
        EXPECT_EQ(r.params.value(name).data, m.params.value(name).data) << name;
    }
    Rng rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        const auto window = random_window(50, rng);
        EXPECT_EQ(regressor_forward(m, window), regressor_forward(r, window));
    }
    fs::remove(path);
}

TEST(Checkpoint, FrozenFlagsRoundTrip) {
    ModelConfig cfg;
    cfg.seed = 41;
    const LstmRegressor target = transfer_surgery(build_lstm_regressor(cfg), 42);
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_frozen.bin";
    save_checkpoint(to_checkpoint(target), path);
    const LstmRegressor r = lstm_regressor_from_checkpoint(load_checkpoint(path));
    for (const std::string& name : r.params.names()) {
        EXPECT_EQ(r.params.frozen(name), name.rfind("lstm.", 0) == 0) << name;
    }
    fs::remove(path);
}

TEST(Checkpoint, TruncatedFileIsCorruptError) {
    ModelConfig cfg;
    cfg.lstm_hidden = 4;
    cfg.fc_units = 4;
    const LstmRegressor m = build_lstm_regressor(cfg);
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_trunc.bin";
    save_checkpoint(to_checkpoint(m), path);
    const auto full_size = fs::file_size(path);
    fs::resize_file(path, full_size - 64);
    EXPECT_THROW(load_checkpoint(path), CheckpointError);
    fs::remove(path);
}

TEST(Checkpoint, FutureVersionRejected) {
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_future.bin";
    std::ofstream(path) << "SNF-CHECKPOINT 99\nkind dnn\npayload 0\n";
    try {
        load_checkpoint(path);
        FAIL() << "expected CheckpointError";
    } catch (const CheckpointError& e) {
        EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
    }
    fs::remove(path);
}

TEST(Checkpoint, DnnRoundTrip) {
    ModelConfig cfg;
    cfg.seed = 55;
    DnnBaseline m = build_dnn(cfg);
    m.scaler = ScalerState{100.0, 400.0};
    m.log_n_min = 3.7;
    m.log_n_max = 4.5;
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_dnn.bin";
    save_checkpoint(to_checkpoint(m), path);
    const DnnBaseline r = dnn_from_checkpoint(load_checkpoint(path));
    EXPECT_DOUBLE_EQ(r.log_n_min, 3.7);
    for (double x : {-0.5, 0.0, 0.3, 1.2}) {
        EXPECT_EQ(dnn_forward(m, x), dnn_forward(r, x));
    }
    fs::remove(path);
}

TEST(Checkpoint, KindMismatchRejected) {
    const DnnBaseline m = build_dnn(ModelConfig{});
    const fs::path path = fs::temp_directory_path() / "snf_ckpt_kind.bin";
    save_checkpoint(to_checkpoint(m), path);
    EXPECT_THROW(lstm_regressor_from_checkpoint(load_checkpoint(path)), CheckpointError);
    fs::remove(path);
}
