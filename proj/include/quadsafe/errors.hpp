#pragma once

#include <stdexcept>
#include <string>

namespace quadsafe {

// Base class for all recoverable conditions raised by the library. The
// simulation harness catches the subclasses below and records them as trace
// events; only NonFiniteState aborts a run.
class QuadsafeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteState : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

// R33 below the controller floor (near 90 deg tilt or inverted).
class AttitudeSingular : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

class ThrustTooSmall : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

// |det W| below det_min in the lateral Lie-derivative chain.
class LateralSingular : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

class InvalidPoles : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

class InvalidArgument : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

// File read/write failure; the message names the path.
class IoError : public QuadsafeError {
public:
    using QuadsafeError::QuadsafeError;
};

}  // namespace quadsafe
