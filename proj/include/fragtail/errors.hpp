#pragma once

#include <stdexcept>
#include <string>

namespace fragtail {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define FRAGTAIL_ERROR(Name)                                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        const char* kind() const noexcept override { return #Name; }           \
    }

FRAGTAIL_ERROR(UnsupportedSampling);
FRAGTAIL_ERROR(DomainError);
FRAGTAIL_ERROR(UnsupportedExpansion);
FRAGTAIL_ERROR(UncoveredRegion);
FRAGTAIL_ERROR(InsufficientWindow);
FRAGTAIL_ERROR(ConfigError);

#undef FRAGTAIL_ERROR

// Carries the error estimate the failing computation actually reached.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}
    const char* kind() const noexcept override { return "NumericalFailure"; }
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

} // namespace fragtail
