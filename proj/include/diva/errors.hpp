#pragma once

#include <stdexcept>
#include <string>

namespace diva {

// Bad input data or malformed files. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss during VAE training. CLI maps this to exit code 3.
struct TrainingDiverged : std::runtime_error {
    int epoch;
    explicit TrainingDiverged(int ep)
        : std::runtime_error("training diverged at epoch " + std::to_string(ep)),
          epoch(ep) {}
};

}  // namespace diva
