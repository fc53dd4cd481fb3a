#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wfrelax {

enum class ErrorCode {
    MalformedDocument,
    NotAWorkflowNet,
    DuplicateLabel,
    StateSpaceExceeded,
    UnknownActivity,
    PreconditionViolated,
    EmptyHistory,
    MissingColumn,
    UnparseableTimestamp,
    EmptyLog,
    EmptyAlphabet,
    UnsupportedTemplate,
    NotFreeChoice,
    UnsoundNet,
    UnknownSession,
    NoLog,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::NotAWorkflowNet: return "NotAWorkflowNet";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::StateSpaceExceeded: return "StateSpaceExceeded";
    case ErrorCode::UnknownActivity: return "UnknownActivity";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableTimestamp: return "UnparseableTimestamp";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::EmptyAlphabet: return "EmptyAlphabet";
    case ErrorCode::UnsupportedTemplate: return "UnsupportedTemplate";
    case ErrorCode::NotFreeChoice: return "NotFreeChoice";
    case ErrorCode::UnsoundNet: return "UnsoundNet";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::NoLog: return "NoLog";
    }
    return "Unknown";
}

/// Every failure raised by the library. `detail` carries the offending node,
/// cell state, row number, etc. in a form suitable for showing to the analyst.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message, std::string detail = {}) {
    throw Error(code, message, std::move(detail));
}

} // namespace wfrelax
