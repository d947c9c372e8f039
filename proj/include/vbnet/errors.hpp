#pragma once

#include <stdexcept>
#include <string>

namespace vbnet {

/// Invalid or inconsistent configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// CSV ingestion failure. `row` is the 1-based data row (0 for header problems).
class IngestionError : public std::runtime_error {
public:
    IngestionError(const std::string& what, std::size_t row)
        : std::runtime_error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
          row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InferenceError : public std::runtime_error {
public:
    InferenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at rollout step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace vbnet
