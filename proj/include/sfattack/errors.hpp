#pragma once

#include <stdexcept>
#include <string>

namespace sfattack {

// Argument lengths disagree with the model dimensions.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A state became non-finite during integration.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Closed-form L2 attack direction K^T grad h_S vanished.
class DegenerateDirectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario file or builtin name could not be turned into a valid config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sfattack
