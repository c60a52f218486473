#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pillbug {

enum class ErrorKind {
    InsufficientSamples,
    SingularFit,
    NoSignChange,
    MultipleRoots,
    ApexMismatch,
    NoIntersection,
    NonConvergence,
    SingularJacobian,
    BranchJump,
    InvalidOptions,
    IdenticalCurves,
    InvalidInput,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::SingularFit: return "SingularFit";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::ApexMismatch: return "ApexMismatch";
    case ErrorKind::NoIntersection: return "NoIntersection";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::BranchJump: return "BranchJump";
    case ErrorKind::InvalidOptions: return "InvalidOptions";
    case ErrorKind::IdenticalCurves: return "IdenticalCurves";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind),
          message_(message) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Message without the kind prefix.
    const std::string& message() const noexcept { return message_; }

    /// True for failures of a numerical procedure, as opposed to bad input or I/O.
    bool is_numerical() const noexcept {
        return kind_ != ErrorKind::Io && kind_ != ErrorKind::InvalidInput &&
               kind_ != ErrorKind::InvalidOptions;
    }

private:
    ErrorKind kind_;
    std::string message_;
};

} // namespace pillbug
