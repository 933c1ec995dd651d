#pragma once

#include <stdexcept>
#include <string>

namespace ehrhard {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, double value)
        : std::domain_error(what), value_(value) {}
    double value() const { return value_; }

private:
    double value_;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Weight pair in the wrong regime for the requested construction.
class RegimeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, double at)
        : std::runtime_error(what), at_(at) {}
    double at() const { return at_; }

private:
    double at_;
};

// A first partial vanishes where the ratio form of the PDI needs it nonzero.
class DegeneratePointError : public std::runtime_error {
public:
    DegeneratePointError(const std::string& what, double x, double y)
        : std::runtime_error(what), x_(x), y_(y) {}
    double x() const { return x_; }
    double y() const { return y_; }

private:
    double x_, y_;
};

}  // namespace ehrhard
