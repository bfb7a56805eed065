#pragma once

#include <stdexcept>
#include <string>

namespace hjlab {

// Bad arguments, dimension mismatches, violated preconditions.
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

struct precondition_error : input_error {
    explicit precondition_error(const std::string& msg) : input_error(msg) {}
};

struct config_error : input_error {
    explicit config_error(const std::string& msg) : input_error(msg) {}
};

// Numerical failures detected at runtime.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argmin/argmax landed on the boundary of its search region.
struct search_radius_error : numeric_error {
    explicit search_radius_error(const std::string& msg) : numeric_error(msg) {}
};

// Monotone-table inversion asked for a value outside the tabulated range.
struct range_error : numeric_error {
    explicit range_error(const std::string& msg) : numeric_error(msg) {}
};

// Every sampled pair fell below the gradient-difference floor.
struct degenerate_model_error : numeric_error {
    explicit degenerate_model_error(const std::string& msg) : numeric_error(msg) {}
};

} // namespace hjlab
