#pragma once

#include <stdexcept>
#include <string>

namespace hfrisk {

/// Broad failure category. The CLI maps each category to its exit code.
enum class ErrorCategory { config, data, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Invalid parameters, unreadable configuration, unknown feature names.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Malformed or unsuitable input data: schema mismatches, parse failures,
/// single-class outcomes, empty cohorts.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class SchemaError : public DataError {
public:
    explicit SchemaError(const std::string& what) : DataError("schema mismatch: " + what) {}
};

class ParseError : public DataError {
public:
    explicit ParseError(const std::string& what) : DataError("parse error: " + what) {}
};

class ClassError : public DataError {
public:
    explicit ClassError(const std::string& what) : DataError("class error: " + what) {}
};

/// Numerical failures: calibration, degenerate samples, undefined metrics.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

inline int exit_code_for(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::numeric: return 4;
    }
    return 1;
}

}  // namespace hfrisk
