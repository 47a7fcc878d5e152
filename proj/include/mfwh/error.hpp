#pragma once

#include <stdexcept>
#include <string>

namespace mfwh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative or direct linear solve failed to reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, int iterations, double residual)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// A Helmholtz system is singular because a frequency hits a discrete eigenvalue.
class ResonanceError : public Error {
public:
    ResonanceError(const std::string& what, double nearest_eigenvalue)
        : Error(what), nearest_(nearest_eigenvalue) {}

    double nearest_eigenvalue() const noexcept { return nearest_; }

private:
    double nearest_;
};

/// Invalid run configuration; the message always names the offending key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& why)
        : Error("config key '" + key + "': " + why), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace mfwh
