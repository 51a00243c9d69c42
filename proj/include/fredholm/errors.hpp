#pragma once

#include <stdexcept>
#include <string>

namespace fredholm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold (bad interval, bad node count, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A dense system is singular or too badly conditioned to trust.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double rcond)
        : Error(what + " (reciprocal condition estimate " + std::to_string(rcond) + ")"),
          rcond_(rcond) {}

    [[nodiscard]] double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

/// An iterative scheme diverged.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace fredholm
