#pragma once

#include <stdexcept>
#include <string>

namespace fracmech {

// Base of every error raised by the library. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fractional order outside the admissible range of the operation.
class OrderDomainError : public Error {
public:
    using Error::Error;
};

// A fractional operator was applied to an expression with a nonzero constant term.
class NonzeroConstantError : public Error {
public:
    using Error::Error;
};

// Result would exceed total degree two.
class DegreeError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DerivationError : public Error {
public:
    using Error::Error;
};

// Evolution needs an equation the canonical system does not provide.
class InertVariableError : public Error {
public:
    using Error::Error;
};

class WellPosednessError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

} // namespace fracmech
