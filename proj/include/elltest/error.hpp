#pragma once

#include <stdexcept>
#include <string>

namespace elltest {

// All library failures derive from Error so callers (the CLI in particular)
// can map them onto a single exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// A covariate whose sample variance is exactly zero.
class DegenerateCovariateError : public Error {
public:
    DegenerateCovariateError(const std::string& what, long column)
        : Error(what), column_(column) {}

    [[nodiscard]] long column() const noexcept { return column_; }

private:
    long column_;
};

class NotPsdError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row, long column)
        : Error(what), row_(row), column_(column) {}

    /// 1-based line number in the source file, or -1 if not applicable.
    [[nodiscard]] long row() const noexcept { return row_; }
    /// 1-based field index, or -1 if not applicable.
    [[nodiscard]] long column() const noexcept { return column_; }

private:
    long row_;
    long column_;
};

}  // namespace elltest
