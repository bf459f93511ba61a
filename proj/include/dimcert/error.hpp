#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace dimcert {

enum class ErrorKind {
    NegativeProbability,
    NormalizationError,
    ShapeMismatch,
    ParseError,
    OutOfRange,
    NotBinary,
    WrongScenario,
    TooLarge,
    DegenerateDenominator,
    InvalidRealization,
    Internal,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NegativeProbability: return "NegativeProbability";
        case ErrorKind::NormalizationError: return "NormalizationError";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::NotBinary: return "NotBinary";
        case ErrorKind::WrongScenario: return "WrongScenario";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::InvalidRealization: return "InvalidRealization";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

/// Structured error carrying a machine-readable kind plus a JSON detail
/// payload (e.g. the list of violated tensor slices).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(std::move(message)), kind_(kind), details_(std::move(details)) {}

    ErrorKind kind() const { return kind_; }
    const nlohmann::json& details() const { return details_; }

    // Process exit code convention: 2 validation, 3 parse, 4 degenerate, 1 internal.
    int exit_code() const {
        switch (kind_) {
            case ErrorKind::ParseError: return 3;
            case ErrorKind::DegenerateDenominator: return 4;
            case ErrorKind::Internal: return 1;
            default: return 2;
        }
    }

    nlohmann::json to_json() const {
        return {{"kind", to_string(kind_)}, {"message", what()}, {"details", details_}};
    }

private:
    ErrorKind kind_;
    nlohmann::json details_;
};

}  // namespace dimcert
