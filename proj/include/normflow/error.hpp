#pragma once

#include <stdexcept>
#include <string>

namespace normflow {

/// Base of every error thrown by the library. `exit_code()` is the process
/// status the CLI maps the error to.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 4; }
};

/// Malformed input document (exit 2).
class ParseError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// A caller-side contract was violated: bad argument, dimension mismatch,
/// required hypothesis not met (exit 3).
class PreconditionError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A structural invariant failed inside the library. Signals a bug (exit 4).
class InvariantError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw PreconditionError(what);
}

inline void ensure(bool cond, const std::string& what)
{
    if (!cond) throw InvariantError(what);
}

} // namespace normflow
