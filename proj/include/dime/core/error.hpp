#pragma once

#include <stdexcept>
#include <string>

namespace dime {

// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input document; message carries line/field position.
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a model constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Operation not allowed in the current state (sessions, episodes).
class StateError : public Error {
public:
    using Error::Error;
};

// A planner ran past its wall-clock budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace dime
