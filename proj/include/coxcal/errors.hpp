#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coxcal {

// Error families map 1:1 onto CLI exit codes.
enum class ErrorFamily : int {
    config = 2,
    schema = 3,
    parse = 4,
    sample = 5,
    numeric = 6,
    identifiability = 7,
    simulation = 8,
    io = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& what)
        : std::runtime_error(what), family_(family) {}

    ErrorFamily family() const { return family_; }
    int exit_code() const { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
};

struct EmptySampleError : Error {
    explicit EmptySampleError(const std::string& what = "empty sample")
        : Error(ErrorFamily::sample, what) {}
};

struct IndexOutOfRangeError : Error {
    IndexOutOfRangeError(std::size_t i, std::size_t n)
        : Error(ErrorFamily::sample,
                "index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")") {}
};

struct DegenerateWeightError : Error {
    explicit DegenerateWeightError(double u)
        : Error(ErrorFamily::numeric,
                "kernel weights underflow at u=" + std::to_string(u) +
                    " (point far outside the sample support)") {}
};

struct MeanNearZeroError : Error {
    explicit MeanNearZeroError(const std::string& what =
                                   "sample mean of the distorted covariate is too close to zero")
        : Error(ErrorFamily::identifiability, what) {}
};

struct PhiNearZeroError : Error {
    explicit PhiNearZeroError(std::size_t subject)
        : Error(ErrorFamily::identifiability,
                "estimated distortion factor below floor for subject " + std::to_string(subject)),
          subject_index(subject) {}
    std::size_t subject_index;
};

struct NonFiniteLikelihoodError : Error {
    explicit NonFiniteLikelihoodError(const std::string& what = "non-finite partial likelihood")
        : Error(ErrorFamily::numeric, what) {}
};

struct SeparationDetectedError : Error {
    explicit SeparationDetectedError(const std::string& what =
                                         "monotone partial likelihood (separation detected)")
        : Error(ErrorFamily::numeric, what) {}
};

struct SingularInformationError : Error {
    explicit SingularInformationError(const std::string& what = "singular information matrix")
        : Error(ErrorFamily::numeric, what) {}
};

struct MaxIterationsError : Error {
    explicit MaxIterationsError(int iterations)
        : Error(ErrorFamily::numeric,
                "Newton-Raphson failed to converge in " + std::to_string(iterations) +
                    " iterations") {}
};

struct BracketFailureError : Error {
    explicit BracketFailureError(const std::string& what =
                                     "target censoring rate unattainable within the tau bracket")
        : Error(ErrorFamily::simulation, what) {}
};

struct TooManyFailuresError : Error {
    TooManyFailuresError(int failures, int replications)
        : Error(ErrorFamily::simulation,
                std::to_string(failures) + " of " + std::to_string(replications) +
                    " replications failed (limit is 5%)") {}
};

struct ParseError : Error {
    ParseError(std::size_t row, const std::string& column, const std::string& detail)
        : Error(ErrorFamily::parse,
                "row " + std::to_string(row) + ", column '" + column + "': " + detail),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error(ErrorFamily::schema, what) {}
};

struct EmptyAfterFilteringError : Error {
    explicit EmptyAfterFilteringError(const std::string& what = "no usable rows after filtering")
        : Error(ErrorFamily::sample, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorFamily::config, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorFamily::io, what) {}
};

}  // namespace coxcal
