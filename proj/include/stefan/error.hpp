#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the supported range of a numerical routine.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure (bracketing, root refinement, factorisation) failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The grid is too coarse for the requested modes.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Field on a grid different from the one expected.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// The boundary is no longer a graph over the unit circle.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Jacobian of the gauge map dropped below the abort threshold.
class GaugeDegeneracyError : public Error {
public:
    using Error::Error;
};

/// Initial temperature is not strictly positive in the interior.
class PhaseError : public Error {
public:
    using Error::Error;
};

/// Initial temperature violates the quantitative Taylor sign condition.
class SignConditionError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class EllipticityError : public Error {
public:
    using Error::Error;
};

/// Duhamel reconstruction asked for times the stored history does not cover.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// The radial front receded although the model only allows melting.
class ModelViolationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Config text could not be parsed; carries the offending line and key.
class ParseError : public Error {
public:
    ParseError(int line, std::string key, const std::string& what)
        : Error("line " + std::to_string(line) + ", key '" + key + "': " + what),
          line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

} // namespace stefan
