#pragma once

#include <stdexcept>
#include <string>

namespace phidro {

enum class ErrorKind {
    Validation,
    NonConvergence,
    GrowthUnbounded,
    AssumptionViolated,
    POutOfRange,
    EpsTooLarge,
    GapTooLarge,
    Io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return "Validation";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::GrowthUnbounded: return "GrowthUnbounded";
        case ErrorKind::AssumptionViolated: return "AssumptionViolated";
        case ErrorKind::POutOfRange: return "POutOfRange";
        case ErrorKind::EpsTooLarge: return "EpsTooLarge";
        case ErrorKind::GapTooLarge: return "GapTooLarge";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Library error carrying a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw Error(ErrorKind::Validation, what);
}

}  // namespace phidro
