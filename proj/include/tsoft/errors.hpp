#pragma once

#include <stdexcept>
#include <string>

namespace tsoft {

// Shape disagreement between two parameter sets or subsets.
struct CongruenceError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside its documented domain.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite data where finite values are required.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// An iterative solver ran out of iterations; carries the last iterate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_iterate)
        : std::runtime_error(what), last_iterate_(last_iterate) {}

    double last_iterate() const noexcept { return last_iterate_; }

private:
    double last_iterate_;
};

} // namespace tsoft
