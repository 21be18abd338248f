#pragma once

#include <stdexcept>
#include <string>

namespace qkica {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input or configuration. The CLI maps this to exit code 1.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Noise budget outside the regime where the error bounds apply.
class BudgetError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Factorization or solver failure. The CLI maps this to exit code 2.
class NumericalError : public Error {
public:
    NumericalError(const std::string& module, const std::string& what)
        : Error(module + ": " + what), module_(module) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

} // namespace qkica
