#pragma once

#include <stdexcept>
#include <string>

namespace mirrortrain {

// All library failures are reported through this type so the CLI can turn
// them into a machine-readable error object.
class Error : public std::runtime_error {
public:
    Error(std::string category, std::string message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::string message) : Error("config", std::move(message)) {}
};

class IoError : public Error {
public:
    explicit IoError(std::string message) : Error("io", std::move(message)) {}
};

class NumericError : public Error {
public:
    explicit NumericError(std::string message) : Error("numeric", std::move(message)) {}
};

}  // namespace mirrortrain
