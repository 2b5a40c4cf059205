#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pimla {

/// Process exit codes used by the command-line runner.
enum class ExitCode : int { ok = 0, validation = 2, io = 3, consistency = 4 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ExitCode::validation, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct DegeneratePartitionError : Error {
    explicit DegeneratePartitionError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct DegenerateGraphError : Error {
    explicit DegenerateGraphError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct UnsupportedInputError : Error {
    explicit UnsupportedInputError(const std::string& what) : Error(ExitCode::validation, what) {}
};

struct TraceValidationError : Error {
    explicit TraceValidationError(const std::string& what) : Error(ExitCode::consistency, what) {}
};

struct DeadlockError : Error {
    explicit DeadlockError(const std::string& what) : Error(ExitCode::consistency, what) {}
};

struct ConsistencyError : Error {
    explicit ConsistencyError(const std::string& what) : Error(ExitCode::consistency, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

} // namespace pimla
