#pragma once

#include <stdexcept>
#include <string>

namespace newsbench {

// Exit-code contract: 0 success, 1 usage/config, 2 data, 3 training/numerical.
// The CLI maps these exception families onto those codes.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace newsbench
