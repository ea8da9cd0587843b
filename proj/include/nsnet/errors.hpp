#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsnet {

// Invalid or inconsistent configuration / input data. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem or file-format failure. Exit code 4.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical blow-up inside a simulation loop. Exit code 3.
struct SimulationDiverged : std::runtime_error {
    std::size_t step;
    SimulationDiverged(std::size_t step_, const std::string& msg)
        : std::runtime_error(msg), step(step_) {}
};

// Not enough samples or bins for the requested analysis. Exit code 2.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nsnet
