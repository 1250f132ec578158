#pragma once

#include <stdexcept>
#include <string>

namespace predictorlab {

// Exception hierarchy. Every error raised by the library derives from one of
// the std exception families so callers can catch broadly or narrowly.

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Query time lies outside the span a signal or history covers.
struct OutOfDomain : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct LookupError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// The Picard contraction factor (nL+1)T is not below one.
struct ContractionViolated : std::domain_error {
    using std::domain_error::domain_error;
};

struct NoSolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedFit : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double last_valid_time)
        : std::runtime_error(what), last_valid_time_(last_valid_time) {}

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

}  // namespace predictorlab
