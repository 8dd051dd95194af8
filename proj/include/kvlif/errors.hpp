#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kvlif {

// Invalid parameter values, malformed configs, shape mismatches.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite values entering or leaving the dynamics core.
// Carries enough position info to locate the offending neuron.
struct StepError : std::runtime_error {
    std::size_t layer = 0;
    std::size_t step = 0;
    std::size_t neuron = 0;

    StepError(const std::string& msg, std::size_t layer_, std::size_t step_, std::size_t neuron_)
        : std::runtime_error(msg + " (layer " + std::to_string(layer_) + ", step " +
                             std::to_string(step_) + ", neuron " + std::to_string(neuron_) + ")"),
          layer(layer_), step(step_), neuron(neuron_) {}
};

// Training aborted on a non-finite loss.
struct DivergenceError : std::runtime_error {
    std::size_t epoch = 0;
    std::size_t batch = 0;

    DivergenceError(std::size_t epoch_, std::size_t batch_)
        : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch_) +
                             ", batch " + std::to_string(batch_)),
          epoch(epoch_), batch(batch_) {}
};

// File system / serialization failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace kvlif
