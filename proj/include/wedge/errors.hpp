#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wedge {

enum class ErrorKind {
    InvalidParams,
    BoundaryCase,
    SingularDenominator,
    DegenerateStart,
    HitZero,
    StepFailure,
    NotSingularCase,
    IllPosedCurve,
    RootsNotReal,
    OrderingUnsupported,
    IllPosedForThisXi,
    IllPosedAlways,
    MertonIllPosed,
    Insolvent,
    ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. `value` carries the numeric payload
/// that matters for the kind: the abscissa for HitZero, the threshold for
/// IllPosedForThisXi, and so on.
class WedgeError : public std::runtime_error {
public:
    WedgeError(ErrorKind kind, const std::string& message,
               std::optional<double> value = std::nullopt)
        : std::runtime_error(message), kind_(kind), value_(value) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::optional<double> value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    std::optional<double> value_;
};

}  // namespace wedge
