#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "snf/errors.hpp"
#include "snf/rng.hpp"

namespace snf {

/// Coefficients of the S-N curve sigma(N) = 10^(a log10 N + b) + d, with the
/// log-spaced cycle grid the curve is sampled on.
struct SnCurveParams {
    double a = 0.0;       // slope coefficient, dimensionless
    double b = 0.0;       // intercept coefficient, dimensionless
    double d = 0.0;       // stress offset, MPa
    double n_min = 5e3;   // cycles
    double n_max = 3e6;   // cycles
    std::size_t n_points = 1000;
    std::string label;

    void validate() const {
        if (!(n_min > 0.0) || !(n_max > n_min)) {
            throw ArgumentError("SnCurveParams: need 0 < n_min < n_max, got n_min=" +
                                std::to_string(n_min) + " n_max=" + std::to_string(n_max));
        }
        if (n_points < 2) throw ArgumentError("SnCurveParams: n_points must be >= 2");
        if (a >= 0.0) {
            std::cerr << "warning: a = " << a
                      << " >= 0 gives a non-decreasing S-N curve\n";
        }
    }
};

/// Ordered (cycles, stress) samples; the prefix of length train_count is the
/// training region, the rest the test region.
struct SnSeries {
    std::vector<double> cycles;
    std::vector<double> stress;
    std::string label;
    std::size_t train_count = 0;

    std::size_t size() const { return cycles.size(); }
    std::size_t test_count() const { return size() - train_count; }

    void validate() const {
        if (cycles.size() != stress.size()) {
            throw ArgumentError("SnSeries: cycles/stress length mismatch");
        }
        for (std::size_t i = 0; i + 1 < cycles.size(); ++i) {
            if (!(cycles[i] < cycles[i + 1])) {
                throw ArgumentError("SnSeries: cycles not strictly increasing at index " +
                                    std::to_string(i + 1));
            }
        }
        for (double s : stress) {
            if (!std::isfinite(s)) throw ArgumentError("SnSeries: non-finite stress");
        }
        if (train_count > size()) throw ArgumentError("SnSeries: train_count out of range");
    }
};

inline double evaluate_sn_curve(const SnCurveParams& p, double n) {
    if (!(n > 0.0)) throw ArgumentError("evaluate_sn_curve: cycle count must be positive");
    const double s = std::pow(10.0, p.a * std::log10(n) + p.b) + p.d;
    if (!std::isfinite(s)) throw NumericError("evaluate_sn_curve: non-finite stress");
    return s;
}

inline std::vector<double> log_spaced_grid(double n_min, double n_max, std::size_t count) {
    if (count < 2) throw ArgumentError("log_spaced_grid: count must be >= 2");
    if (!(n_min > 0.0) || !(n_max > n_min)) {
        throw ArgumentError("log_spaced_grid: need 0 < n_min < n_max");
    }
    const double lo = std::log10(n_min);
    const double hi = std::log10(n_max);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = std::pow(10.0, lo + static_cast<double>(i) * step);
    }
    grid.front() = n_min;
    grid.back() = n_max;
    return grid;
}

inline SnSeries synthesize_series(const SnCurveParams& params, const std::string& label,
                                  double noise_std, std::uint64_t seed) {
    if (noise_std < 0.0) throw ArgumentError("synthesize_series: noise_std must be >= 0");
    params.validate();
    SnSeries s;
    s.label = label;
    s.cycles = log_spaced_grid(params.n_min, params.n_max, params.n_points);
    s.stress.reserve(s.cycles.size());
    Rng rng(seed);
    for (double n : s.cycles) {
        double v = evaluate_sn_curve(params, n);
        if (noise_std > 0.0) v += noise_std * rng.gaussian();
        s.stress.push_back(v);
    }
    return s;
}

inline SnSeries split_series(const SnSeries& series, std::size_t train_count) {
    if (train_count > series.size()) {
        throw ArgumentError("split_series: train_count " + std::to_string(train_count) +
                            " exceeds series length " + std::to_string(series.size()));
    }
    SnSeries out = series;
    out.train_count = train_count;
    return out;
}

struct SnFit {
    SnCurveParams params;
    double residual_norm = 0.0;  // sqrt of the residual sum of squares, MPa
};

struct FitError : Error {
    FitError(const std::string& msg, SnCurveParams last) : Error(msg), last_iterate(last) {}
    SnCurveParams last_iterate;
};

namespace detail {

// For fixed offset d, (a, b) solve a linear least-squares problem in log space:
// log10(stress - d) = a log10(N) + b. Returns the SSE in stress space.
inline double fit_ab_for_offset(const SnSeries& s, double d, double& a, double& b) {
    const std::size_t n = s.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = s.stress[i] - d;
        if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
        const double x = std::log10(s.cycles[i]);
        const double y = std::log10(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    a = (nn * sxy - sx * sy) / denom;
    b = (sy - a * sx) / nn;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = std::pow(10.0, a * std::log10(s.cycles[i]) + b) + d;
        const double e = pred - s.stress[i];
        sse += e * e;
    }
    return sse;
}

}  // namespace detail

/// Least-squares fit of (a, b, d). d is located by coarse scan plus
/// golden-section refinement over [0, min stress); (a, b) are the closed-form
/// log-space solution at each candidate d.
inline SnFit fit_sn_params(const SnSeries& series) {
    series.validate();
    if (series.size() < 3) throw ArgumentError("fit_sn_params: need at least 3 points");
    double smin = series.stress[0];
    for (double v : series.stress) smin = std::min(smin, v);

    SnCurveParams best;
    best.n_min = series.cycles.front();
    best.n_max = series.cycles.back();
    best.n_points = series.size();
    best.label = series.label;

    if (!(smin > 0.0)) {
        throw FitError("fit_sn_params: min stress <= 0, offset search range empty", best);
    }
    const double d_hi = smin * (1.0 - 1e-9);

    double best_sse = std::numeric_limits<double>::infinity();
    double best_d = 0.0;
    const int coarse = 256;
    for (int i = 0; i < coarse; ++i) {
        const double d = d_hi * static_cast<double>(i) / static_cast<double>(coarse);
        double a, b;
        const double sse = detail::fit_ab_for_offset(series, d, a, b);
        if (sse < best_sse) {
            best_sse = sse;
            best_d = d;
            best.a = a;
            best.b = b;
        }
    }
    if (!std::isfinite(best_sse)) {
        throw FitError("fit_sn_params: no feasible offset found", best);
    }

    // Golden-section refinement of d around the best coarse cell.
    const double cell = d_hi / coarse;
    double lo = std::max(0.0, best_d - cell);
    double hi = std::min(d_hi, best_d + cell);
    const double gr = 0.61803398874989484820;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double a1, b1, a2, b2;
    double f1 = detail::fit_ab_for_offset(series, x1, a1, b1);
    double f2 = detail::fit_ab_for_offset(series, x2, a2, b2);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, d_hi); ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            a2 = a1;
            b2 = b1;
            x1 = hi - gr * (hi - lo);
            f1 = detail::fit_ab_for_offset(series, x1, a1, b1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            a1 = a2;
            b1 = b2;
            x2 = lo + gr * (hi - lo);
            f2 = detail::fit_ab_for_offset(series, x2, a2, b2);
        }
    }
    if (f1 < best_sse) {
        best_sse = f1;
        best.a = a1;
        best.b = b1;
        best_d = x1;
    }
    if (f2 < best_sse) {
        best_sse = f2;
        best.a = a2;
        best.b = b2;
        best_d = x2;
    }
    best.d = best_d;
    if (!std::isfinite(best.a) || !std::isfinite(best.b)) {
        throw FitError("fit_sn_params: fit did not converge", best);
    }
    return SnFit{best, std::sqrt(best_sse)};
}

/// Min-max normalization state, fitted on a training region only.
struct ScalerState {
    double stress_min = 0.0;
    double stress_max = 1.0;

    double scale(double stress) const {
        return (stress - stress_min) / (stress_max - stress_min);
    }
    double unscale(double value) const {
        return stress_min + value * (stress_max - stress_min);
    }
};

inline ScalerState fit_scaler(const SnSeries& series) {
    if (series.train_count == 0) {
        throw ArgumentError("fit_scaler: series has an empty training region");
    }
    double lo = series.stress[0];
    double hi = series.stress[0];
    for (std::size_t i = 0; i < series.train_count; ++i) {
        lo = std::min(lo, series.stress[i]);
        hi = std::max(hi, series.stress[i]);
    }
    if (!(hi > lo)) {
        throw ArgumentError("fit_scaler: constant training region, stress range is empty");
    }
    return ScalerState{lo, hi};
}

inline std::vector<double> scale_all(const ScalerState& s, const std::vector<double>& stress) {
    std::vector<double> out(stress.size());
    for (std::size_t i = 0; i < stress.size(); ++i) out[i] = s.scale(stress[i]);
    return out;
}

inline std::vector<double> unscale_all(const ScalerState& s, const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s.unscale(v[i]);
    return out;
}

// ---------------------------------------------------------------------------
// CSV: header `cycles,stress_mpa`, one row per point, LF line endings.

inline void write_series_csv(const SnSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("write_series_csv: cannot open " + path.string());
    out << "cycles,stress_mpa\n";
    char buf[80];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", series.cycles[i], series.stress[i]);
        out << buf;
    }
    if (!out) throw ArgumentError("write_series_csv: write failed for " + path.string());
}

inline SnSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("read_series_csv: cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "cycles,stress_mpa") {
        throw ParseError("expected header 'cycles,stress_mpa', got '" + line + "'", line_no);
    }
    SnSeries s;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("missing comma", line_no);
        char* end = nullptr;
        const std::string c_str = line.substr(0, comma);
        const std::string v_str = line.substr(comma + 1);
        const double c = std::strtod(c_str.c_str(), &end);
        if (end == c_str.c_str() || *end != '\0') {
            throw ParseError("non-numeric cycles value '" + c_str + "'", line_no);
        }
        const double v = std::strtod(v_str.c_str(), &end);
        if (end == v_str.c_str() || *end != '\0') {
            throw ParseError("non-numeric stress value '" + v_str + "'", line_no);
        }
        if (!s.cycles.empty() && !(c > s.cycles.back())) {
            throw ParseError("cycles not strictly increasing", line_no);
        }
        s.cycles.push_back(c);
        s.stress.push_back(v);
    }
    if (s.cycles.empty()) throw ParseError("no data rows", line_no);
    return s;
}

}  // namespace snf
