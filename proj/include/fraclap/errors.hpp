#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Raised for structurally invalid inputs: bad parameters, malformed configs,
// points outside a chart. The CLI maps these to exit code 2.
class config_error : public std::invalid_argument {
public:
    config_error(std::string code, const std::string& what)
        : std::invalid_argument(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Raised when a computation cannot meet its accuracy contract: truncation
// tails above tolerance, non-converging schedules, diverging descent.
// The CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
public:
    numeric_error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}
