#pragma once

#include <stdexcept>
#include <string>

namespace gsw {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical errors (linear algebra layer).
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class DowndateBreaksPd : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

// Sampler errors.
class NoPivot : public Error {
public:
    using Error::Error;
};

class ZeroDirection : public Error {
public:
    using Error::Error;
};

class DegenerateConstraint : public Error {
public:
    using Error::Error;
};

class FatalNumerical : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

// Oracle errors.
class TooLarge : public Error {
public:
    using Error::Error;
};

// Baseline errors.
class OddN : public Error {
public:
    using Error::Error;
};

class ExhaustedDraws : public Error {
public:
    using Error::Error;
};

// Estimator errors.
class EmptyArm : public Error {
public:
    using Error::Error;
};

// Data ingestion errors.
class ParseError : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class DegenerateCovariates : public Error {
public:
    using Error::Error;
};

}  // namespace gsw
