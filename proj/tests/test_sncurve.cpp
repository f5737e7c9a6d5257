#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "snf/rng.hpp"
#include "snf/sncurve.hpp"

namespace fs = std::filesystem;
using namespace snf;

namespace {

SnCurveParams make_params(double a, double b, double d, double n_min = 5e3,
                          double n_max = 3e6, std::size_t n_points = 1000) {
    SnCurveParams p;
    p.a = a;
    p.b = b;
    p.d = d;
    p.n_min = n_min;
    p.n_max = n_max;
    p.n_points = n_points;
    return p;
}

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

}  // namespace

TEST(EvaluateSnCurve, KnownValues) {
    // 10^(-0.1*4 + 3) + 100 = 10^2.6 + 100
    EXPECT_NEAR(evaluate_sn_curve(make_params(-0.1, 3, 100), 1e4),
                std::pow(10.0, 2.6) + 100.0, 1e-9);
    // zero slope: constant 10^2 = 100
    EXPECT_DOUBLE_EQ(evaluate_sn_curve(make_params(0, 2, 0), 17.0), 100.0);
    EXPECT_DOUBLE_EQ(evaluate_sn_curve(make_params(0, 2, 0), 2.9e6), 100.0);
    // 10^(-0.5*4 + 5) + 50 = 1050 exactly
    EXPECT_DOUBLE_EQ(evaluate_sn_curve(make_params(-0.5, 5, 50), 1e4), 1050.0);
}

TEST(EvaluateSnCurve, RejectsNonPositiveCycles) {
    EXPECT_THROW(evaluate_sn_curve(make_params(-0.1, 3, 0), 0.0), ArgumentError);
    EXPECT_THROW(evaluate_sn_curve(make_params(-0.1, 3, 0), -5.0), ArgumentError);
}

TEST(EvaluateSnCurve, StrictlyDecreasingForNegativeSlope) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const SnCurveParams p = make_params(rng.uniform(-1.0, -0.01), rng.uniform(1.0, 5.0),
                                            rng.uniform(0.0, 200.0));
        const double n1 = std::pow(10.0, rng.uniform(1.0, 6.0));
        const double n2 = n1 * (1.0 + rng.uniform(0.01, 10.0));
        EXPECT_GT(evaluate_sn_curve(p, n1), evaluate_sn_curve(p, n2));
    }
}

TEST(LogSpacedGrid, DecadeSpacing) {
    const auto g = log_spaced_grid(10, 1000, 3);
    ASSERT_EQ(g.size(), 3u);
    EXPECT_NEAR(g[0], 10.0, 1e-12);
    EXPECT_NEAR(g[1], 100.0, 1e-9);
    EXPECT_NEAR(g[2], 1000.0, 1e-12);
}

TEST(LogSpacedGrid, PaperGrid) {
    const auto g = log_spaced_grid(5e3, 3e6, 1000);
    ASSERT_EQ(g.size(), 1000u);
    EXPECT_DOUBLE_EQ(g.front(), 5000.0);
    EXPECT_DOUBLE_EQ(g.back(), 3000000.0);
    // Closed-form value at index 599, computed independently of the
    // implementation's loop.
    const double lo = std::log10(5e3);
    const double hi = std::log10(3e6);
    const double expected = std::pow(10.0, lo + 599.0 * (hi - lo) / 999.0);
    EXPECT_NEAR(g[599], expected, expected * 1e-12);
    EXPECT_NEAR(g[599], 2.316e5, 2.316e5 * 1e-3);
}

TEST(LogSpacedGrid, ConstantRatioProperty) {
    const auto g = log_spaced_grid(5e3, 3e6, 1000);
    const double r0 = g[1] / g[0];
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        EXPECT_NEAR(g[i + 1] / g[i], r0, r0 * 1e-12);
    }
}

TEST(LogSpacedGrid, RejectsBadArguments) {
    EXPECT_THROW(log_spaced_grid(10, 1000, 1), ArgumentError);
    EXPECT_THROW(log_spaced_grid(-1, 1000, 5), ArgumentError);
    EXPECT_THROW(log_spaced_grid(1000, 10, 5), ArgumentError);
}

TEST(SynthesizeSeries, NoiselessMatchesCurve) {
    const SnCurveParams p = make_params(-0.3, 4, 120);
    const SnSeries s = synthesize_series(p, "axial", 0.0, 1);
    ASSERT_EQ(s.size(), 1000u);
    for (std::size_t i = 0; i < s.size(); i += 97) {
        EXPECT_DOUBLE_EQ(s.stress[i], evaluate_sn_curve(p, s.cycles[i]));
    }
}

TEST(SynthesizeSeries, DeterministicUnderSeed) {
    const SnCurveParams p = make_params(-0.3, 4, 120);
    const SnSeries s1 = synthesize_series(p, "axial", 2.0, 5);
    const SnSeries s2 = synthesize_series(p, "axial", 2.0, 5);
    EXPECT_EQ(s1.stress, s2.stress);
    const SnSeries s3 = synthesize_series(p, "axial", 2.0, 6);
    EXPECT_NE(s1.stress, s3.stress);
}

TEST(SynthesizeSeries, RejectsNegativeNoise) {
    EXPECT_THROW(synthesize_series(make_params(-0.3, 4, 120), "x", -1.0, 1), ArgumentError);
}

TEST(FitSnParams, NoiselessRoundTrip) {
    const SnCurveParams truth = make_params(-0.2, 4, 80);
    const SnSeries s = synthesize_series(truth, "axial", 0.0, 1);
    const SnFit fit = fit_sn_params(s);
    EXPECT_NEAR(fit.params.a, truth.a, 1e-6);
    EXPECT_NEAR(fit.params.b, truth.b, 1e-6);
    EXPECT_NEAR(fit.params.d, truth.d, 1e-6);
    EXPECT_LT(fit.residual_norm, 1e-5);
}

TEST(FitSnParams, ConstantSeriesRecoversZeroSlope) {
    SnSeries s;
    s.cycles = log_spaced_grid(1e3, 1e6, 50);
    s.stress.assign(50, 250.0);
    const SnFit fit = fit_sn_params(s);
    EXPECT_NEAR(fit.params.a, 0.0, 1e-8);
}

TEST(FitSnParams, NoisyRoundTripWithinFivePercent) {
    const SnCurveParams truth = make_params(-0.25, 4.2, 90);
    const SnSeries s = synthesize_series(truth, "axial", 1.0, 31);
    const SnFit fit = fit_sn_params(s);
    EXPECT_NEAR(fit.params.a, truth.a, std::abs(truth.a) * 0.05);
    EXPECT_NEAR(fit.params.b, truth.b, std::abs(truth.b) * 0.05);
    EXPECT_NEAR(fit.params.d, truth.d, std::abs(truth.d) * 0.05);
}

TEST(FitSnParams, RejectsTinySeries) {
    SnSeries s;
    s.cycles = {10, 20};
    s.stress = {5, 4};
    EXPECT_THROW(fit_sn_params(s), ArgumentError);
}

TEST(SplitSeries, PaperCutoffs) {
    const SnCurveParams p = make_params(-0.3, 4, 120);
    const SnSeries axial = split_series(synthesize_series(p, "axial", 0.0, 1), 600);
    EXPECT_EQ(axial.train_count, 600u);
    EXPECT_NEAR(axial.cycles[599], 2.31e5, 2.31e5 * 0.01);
    const SnSeries torsional = split_series(synthesize_series(p, "torsional", 0.0, 1), 300);
    EXPECT_NEAR(torsional.cycles[299], 3.4e4, 3.4e4 * 0.02);
}

TEST(SplitSeries, BoundaryAndErrors) {
    const SnSeries s = synthesize_series(make_params(-0.3, 4, 120), "x", 0.0, 1);
    const SnSeries empty_train = split_series(s, 0);
    EXPECT_EQ(empty_train.train_count, 0u);
    EXPECT_EQ(empty_train.test_count(), s.size());
    EXPECT_EQ(split_series(s, s.size()).train_count, s.size());
    EXPECT_THROW(split_series(s, s.size() + 1), ArgumentError);
}

TEST(Scaler, MidpointAndInverse) {
    SnSeries s;
    s.cycles = {1, 2, 3};
    s.stress = {100, 200, 300};
    s.train_count = 3;
    const ScalerState sc = fit_scaler(s);
    EXPECT_DOUBLE_EQ(sc.scale(200.0), 0.5);
    EXPECT_DOUBLE_EQ(sc.scale(100.0), 0.0);
    EXPECT_DOUBLE_EQ(sc.scale(300.0), 1.0);
    for (double x : {87.3, 412.9}) {
        EXPECT_NEAR(sc.unscale(sc.scale(x)), x, std::abs(x) * 1e-12);
    }
}

TEST(Scaler, ExtrapolationGoesNegative) {
    // Decreasing synthetic curve: test-region stress is below the training
    // minimum, so scaled values are negative by construction.
    const SnCurveParams p = make_params(-0.4, 4.5, 100);
    const SnSeries s = split_series(synthesize_series(p, "x", 0.0, 1), 600);
    const ScalerState sc = fit_scaler(s);
    EXPECT_LT(sc.scale(s.stress.back()), 0.0);
}

TEST(Scaler, ConstantTrainingRegionFails) {
    SnSeries s;
    s.cycles = {1, 2, 3};
    s.stress = {5, 5, 5};
    s.train_count = 3;
    EXPECT_THROW(fit_scaler(s), ArgumentError);
    s.train_count = 0;
    EXPECT_THROW(fit_scaler(s), ArgumentError);
}

TEST(SeriesCsv, RoundTrip) {
    const SnCurveParams p = make_params(-0.34, 3.9, 150);
    const SnSeries s = synthesize_series(p, "axial", 0.5, 9);
    const fs::path path = temp_file("snf_roundtrip.csv");
    write_series_csv(s, path);
    const SnSeries r = read_series_csv(path);
    ASSERT_EQ(r.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR(r.cycles[i], s.cycles[i], std::abs(s.cycles[i]) * 1e-9);
        EXPECT_NEAR(r.stress[i], s.stress[i], std::abs(s.stress[i]) * 1e-9);
    }
    fs::remove(path);
}

TEST(SeriesCsv, HeaderOnlyFails) {
    const fs::path path = temp_file("snf_header_only.csv");
    std::ofstream(path) << "cycles,stress_mpa\n";
    EXPECT_THROW(read_series_csv(path), ParseError);
    fs::remove(path);
}

TEST(SeriesCsv, MalformedRowNamesLine) {
    const fs::path path = temp_file("snf_malformed.csv");
    std::ofstream(path) << "cycles,stress_mpa\n100,250\n200,not_a_number\n";
    try {
        read_series_csv(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line_number, 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    fs::remove(path);
}

TEST(SeriesCsv, NonMonotoneCyclesFail) {
    const fs::path path = temp_file("snf_nonmono.csv");
    std::ofstream(path) << "cycles,stress_mpa\n100,250\n90,240\n";
    EXPECT_THROW(read_series_csv(path), ParseError);
    fs::remove(path);
}
