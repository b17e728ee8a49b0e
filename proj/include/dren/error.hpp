#pragma once

#include <stdexcept>
#include <string>

namespace dren {

// Root of the library's exception hierarchy.
class DrenError : public std::runtime_error {
public:
    explicit DrenError(const std::string& what) : std::runtime_error(what) {}
};

// Bad data fed to an operation (shape mismatch, non-finite entries, ...).
class InvalidInputError : public DrenError {
public:
    explicit InvalidInputError(const std::string& what) : DrenError(what) {}
};

// A configuration value outside its documented domain.
class InvalidConfigError : public DrenError {
public:
    explicit InvalidConfigError(const std::string& what) : DrenError(what) {}
};

// Training produced non-finite losses or gradients.
class TrainingDivergedError : public DrenError {
public:
    explicit TrainingDivergedError(const std::string& what) : DrenError(what) {}
};

// An iterative optimizer failed to produce a usable result.
class OptimizationFailedError : public DrenError {
public:
    explicit OptimizationFailedError(const std::string& what) : DrenError(what) {}
};

// A numerical test oracle could not be evaluated.
class OracleFailureError : public DrenError {
public:
    explicit OracleFailureError(const std::string& what) : DrenError(what) {}
};

// File parsing / serialization failure.
class IoError : public DrenError {
public:
    explicit IoError(const std::string& what) : DrenError(what) {}
};

} // namespace dren
