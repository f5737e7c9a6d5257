#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Conforming-shape violations; message names both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// NaN/Inf escaped a numeric operation.
struct NumericError : Error {
    using Error::Error;
};

// Precondition violations on operation arguments (bad bounds, counts, ranges).
struct ArgumentError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct CheckpointError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    TrainingError(const std::string& msg, std::size_t epoch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
    std::size_t epoch;
};

}  // namespace snf
