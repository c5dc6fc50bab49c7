#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace phsim {

/// Vector/matrix sizes that do not match the owning system.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A strain argument left the domain (0, inf) of the stored energy.
class StrainDomainError : public std::domain_error {
public:
    StrainDomainError(std::size_t element, double value);

    std::size_t element() const noexcept { return element_; }
    double value() const noexcept { return value_; }

private:
    std::size_t element_;
    double value_;
};

/// Base class for failures of a single implicit time step.
class StepError : public std::runtime_error {
public:
    explicit StepError(const std::string& what);

    /// Index of the failing step within an integration run, when known.
    const std::optional<std::size_t>& step_index() const noexcept { return step_; }
    void set_step_index(std::size_t step);

    const char* what() const noexcept override { return message_.c_str(); }

private:
    std::string base_;
    std::string message_;
    std::optional<std::size_t> step_;
};

class NonConvergenceError : public StepError {
public:
    NonConvergenceError(int iterations, double residual_norm);

    int iterations() const noexcept { return iterations_; }
    double residual_norm() const noexcept { return residual_norm_; }

private:
    int iterations_;
    double residual_norm_;
};

/// A Newton iterate (or its midpoint with the previous state) produced C <= 0.
class StrainDomainViolation : public StepError {
public:
    StrainDomainViolation(std::size_t element, double value, int iteration);

    std::size_t element() const noexcept { return element_; }
    double value() const noexcept { return value_; }
    int iteration() const noexcept { return iteration_; }

private:
    std::size_t element_;
    double value_;
    int iteration_;
};

} // namespace phsim
