// errors.hpp
#pragma once
#include <stdexcept>
#include <string>

namespace adasense {

// Caller supplied something outside an operation's domain. The CLI maps these
// to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidAction : public ValidationError { using ValidationError::ValidationError; };
class InvalidEpsilon : public ValidationError { using ValidationError::ValidationError; };
class InvalidSparsity : public ValidationError { using ValidationError::ValidationError; };
class InvalidDimension : public ValidationError { using ValidationError::ValidationError; };
class ClassTooLarge : public ValidationError { using ValidationError::ValidationError; };
class OutOfSupport : public ValidationError { using ValidationError::ValidationError; };
class EmptyCurve : public ValidationError { using ValidationError::ValidationError; };
class ConfigError : public ValidationError { using ValidationError::ValidationError; };

// A hard-mode measurement would overrun the precision budget. Strategies that
// respect their ledger never trigger this.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace adasense
