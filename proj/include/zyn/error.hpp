#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace zyn {

enum class ErrorCode {
    InvalidSpec,
    LengthMismatch,
    EmptyText,
    InvalidConfig,
    InvalidArgument,
    BackendTimeout,
    BackendProtocolError,
    TokenNotFound,
    AllCandidatesFailed,
    KeyOutOfRange,
    DegenerateInput,
    EmptyInput,
    Cancelled,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Value-or-error holder for per-item results in batched calls.
template <class T>
class Outcome {
public:
    Outcome(T value) : data_(std::move(value)) {}
    Outcome(Error error) : data_(std::move(error)) {}

    bool ok() const noexcept { return std::holds_alternative<T>(data_); }
    explicit operator bool() const noexcept { return ok(); }

    const T& value() const {
        if (!ok()) throw std::get<Error>(data_);
        return std::get<T>(data_);
    }
    const Error& error() const { return std::get<Error>(data_); }

private:
    std::variant<T, Error> data_;
};

}  // namespace zyn
