#pragma once

#include <stdexcept>
#include <string>

namespace degflow {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define DEGFLOW_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(#Name, what) {}    \
    }

DEGFLOW_DEFINE_ERROR(DomainError);
DEGFLOW_DEFINE_ERROR(InconclusiveError);
DEGFLOW_DEFINE_ERROR(SlowDecayError);
DEGFLOW_DEFINE_ERROR(ConvergenceError);
DEGFLOW_DEFINE_ERROR(NonFiniteError);
DEGFLOW_DEFINE_ERROR(MonotonicityError);
DEGFLOW_DEFINE_ERROR(MassError);
DEGFLOW_DEFINE_ERROR(ShapeError);
DEGFLOW_DEFINE_ERROR(CflError);
DEGFLOW_DEFINE_ERROR(BlowupError);
DEGFLOW_DEFINE_ERROR(TimeRangeError);
DEGFLOW_DEFINE_ERROR(ConfigError);

#undef DEGFLOW_DEFINE_ERROR

}  // namespace degflow
