#pragma once

/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by the solvers and the command-line front end.
 *
 * Every error carries a short machine-readable category so the CLI can print
 * a single `error: <category>: <message>` line.
 */

#include <stdexcept>
#include <string>

namespace klshell {

class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), m_category(std::move(category)) {}

    const std::string& category() const noexcept { return m_category; }

private:
    std::string m_category;
};

/// Invalid user-supplied parameter. The message starts with the offending field name.
class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : Error("validation", field + ": " + what), m_field(field), m_message(what) {}

    const std::string& field() const noexcept { return m_field; }
    /// Message without the field prefix.
    const std::string& message() const noexcept { return m_message; }

private:
    std::string m_field;
    std::string m_message;
};

/// Courant condition violated; the caller must shrink the time step.
class StepSizeError : public Error {
public:
    explicit StepSizeError(const std::string& what) : Error("step", what) {}
};

/// Non-finite state or other runtime failure inside a solver.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

/// Programming error such as an undersized ghost region.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error("internal", what) {}
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("parse", (line > 0 ? "line " + std::to_string(line) + ": " : std::string{}) + what),
          m_line(line) {}

    int line() const noexcept { return m_line; }

private:
    int m_line;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

} // namespace klshell
