#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pimalign {

enum class ErrorCode {
    CapacityExceeded,
    MisalignedTransfer,
    OversizeTransfer,
    OutOfBounds,
    BudgetExceeded,
    ScoreOverflow,
    InvalidArgument,
    ParseError,
    AlphabetError,
    LengthMismatch,
    Unalignable,
    DatasetTooLarge,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::MisalignedTransfer: return "MisalignedTransfer";
        case ErrorCode::OversizeTransfer: return "OversizeTransfer";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::ScoreOverflow: return "ScoreOverflow";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::AlphabetError: return "AlphabetError";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::Unalignable: return "Unalignable";
        case ErrorCode::DatasetTooLarge: return "DatasetTooLarge";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

inline bool error_code_from_string(std::string_view name, ErrorCode& out) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
        auto code = static_cast<ErrorCode>(i);
        if (to_string(code) == name) {
            out = code;
            return true;
        }
    }
    return false;
}

class PimError : public std::runtime_error {
public:
    PimError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pimalign
