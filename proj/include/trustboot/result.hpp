#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace trustboot {

// Failure vocabulary shared by every module and mirrored by the C API.
enum class Err {
    // crypto
    AuthFail,
    DegenerateShare,
    EmptyPassword,
    // wire
    MalformedPacket,
    // actors
    DuplicateEmployee,
    WrongPassword,
    IntegrityError,
    BadCardSignature,
    AlreadyProvisioned,
    WrongPhase,
    MasterNotTrusted,
    UnknownEmployee,
    AparamMismatch,
    ReplayDetected,
    UnknownMaster,
    BadMasterSignature,
    BadEmsSignature,
    BadSmSignature,
    WrongNetwork,
    CounterMismatch,
    NotVerified,
    WrongCapability,
    // bus
    UnknownPrincipal,
    IndexOutOfRange,
    // harness
    ConfigError,
    IoError,
    Internal,
};

const char* err_name(Err e);

struct Error {
    Err code;
    std::string detail;
};

template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error e) : v_(std::move(e)) {}
    Result(Err code, std::string detail = {}) : v_(Error{code, std::move(detail)}) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T& value() & { return std::get<T>(v_); }
    T take() { return std::get<T>(std::move(v_)); }  // moves the value out

    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

    const Error& error() const { return std::get<Error>(v_); }
    Err code() const { return error().code; }

private:
    std::variant<T, Error> v_;
};

template <>
class [[nodiscard]] Result<void> {
public:
    Result() = default;
    Result(Error e) : err_(std::move(e)) {}
    Result(Err code, std::string detail = {}) : err_(Error{code, std::move(detail)}) {}

    bool ok() const { return !err_.has_value(); }
    explicit operator bool() const { return ok(); }

    const Error& error() const { return *err_; }
    Err code() const { return err_->code; }

private:
    std::optional<Error> err_;
};

inline Result<void> ok() { return Result<void>{}; }

}  // namespace trustboot
