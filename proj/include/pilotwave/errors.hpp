#pragma once

#include <stdexcept>
#include <string>

namespace pilotwave {

// Base of every library error. The CLI maps these to exit code 3
// unless a more specific mapping applies.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Grid too coarse for the requested feature (e.g. packet narrower than 4 cells).
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Support of a state leaks past the computational domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Caller violated an operation's documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Non-finite values or norm drift past the stepping tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pilotwave
