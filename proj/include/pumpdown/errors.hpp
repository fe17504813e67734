#pragma once

#include <stdexcept>
#include <string>

namespace pumpdown {

/// Error taxonomy shared across the library. Each value corresponds to a
/// documented failure mode of some operation; functions that can fail
/// cheaply return Result<T> instead of throwing.
enum class ErrorCode {
    None = 0,
    HyperbolicOrbit,
    RadiusOutOfRange,
    InfeasibleResonance,
    NoConvergence,
    SeedInfeasible,
    SolverDiverged,
    OutOfSpan,
    DeltaVCapExceeded,
    BelowFamilyFloor,
    EmptyFront,
    InconsistentChain,
    ParseError,
    ValidationError,
    IoError,
    UnknownTourId,
};

const char* error_name(ErrorCode c);

/// Minimal expected-style carrier: either a value or an ErrorCode with an
/// optional human-readable detail string.
template <typename T>
class Result {
  public:
    Result(T value) : value_(std::move(value)), code_(ErrorCode::None) {}
    Result(ErrorCode code, std::string message = {})
        : value_(), code_(code), message_(std::move(message)) {}

    bool ok() const { return code_ == ErrorCode::None; }
    explicit operator bool() const { return ok(); }
    ErrorCode error() const { return code_; }
    const std::string& message() const { return message_; }

    const T& operator*() const& { return value_; }
    T& operator*() & { return value_; }
    const T* operator->() const { return &value_; }
    T* operator->() { return &value_; }

    const T& value() const& {
        if (!ok()) throw std::runtime_error(std::string("Result: ") + error_name(code_));
        return value_;
    }

  private:
    T value_;
    ErrorCode code_;
    std::string message_;
};

}  // namespace pumpdown
