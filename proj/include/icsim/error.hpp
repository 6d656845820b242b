#pragma once

#include <stdexcept>
#include <string>

namespace icsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: dimension mismatch, asymmetric matrix, bad claimed bounds.
class InvalidInstance : public Error {
public:
    using Error::Error;
};

class NotStronglyConvex : public Error {
public:
    using Error::Error;
};

class AmbiguousOptimum : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const { return eigenvalue_; }

private:
    double eigenvalue_;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int round) : Error(what), round_(round) {}
    int round() const { return round_; }

private:
    int round_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace icsim
