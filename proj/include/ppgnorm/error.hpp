#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppgnorm {

enum class ErrorCode {
    EmptyInput,
    InvalidArgument,
    MixedSubjects,
    MixedSampleRates,
    MarkerOutOfBounds,
    MarkerOverlap,
    LengthNotDivisible,
    BandCountMismatch,
    SpecMismatch,
    UnsupportedWavelet,
    WrongDomain,
    ConstantSignal,
    TooShort,
    TooFewPeaks,
    ImplausibleHeartRate,
    NonPositiveInput,
    NonPositiveRatio,
    ZeroBaselineFeature,
    DegenerateFeature,
    SingleClassInput,
    NoConvergence,
    DimensionMismatch,
    SingleSubject,
    UnlabeledInstance,
    UnknownTask,
    EmptyMatrix,
    MissingFile,
    MalformedRow,
    NonFiniteSample,
    ConfigError,
    IoError,
};

// Maps onto process exit codes: Config -> 2, Data -> 3, Numeric -> 4.
enum class ErrorCategory { Config, Data, Numeric };

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MixedSubjects: return "MixedSubjects";
        case ErrorCode::MixedSampleRates: return "MixedSampleRates";
        case ErrorCode::MarkerOutOfBounds: return "MarkerOutOfBounds";
        case ErrorCode::MarkerOverlap: return "MarkerOverlap";
        case ErrorCode::LengthNotDivisible: return "LengthNotDivisible";
        case ErrorCode::BandCountMismatch: return "BandCountMismatch";
        case ErrorCode::SpecMismatch: return "SpecMismatch";
        case ErrorCode::UnsupportedWavelet: return "UnsupportedWavelet";
        case ErrorCode::WrongDomain: return "WrongDomain";
        case ErrorCode::ConstantSignal: return "ConstantSignal";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::TooFewPeaks: return "TooFewPeaks";
        case ErrorCode::ImplausibleHeartRate: return "ImplausibleHeartRate";
        case ErrorCode::NonPositiveInput: return "NonPositiveInput";
        case ErrorCode::NonPositiveRatio: return "NonPositiveRatio";
        case ErrorCode::ZeroBaselineFeature: return "ZeroBaselineFeature";
        case ErrorCode::DegenerateFeature: return "DegenerateFeature";
        case ErrorCode::SingleClassInput: return "SingleClassInput";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SingleSubject: return "SingleSubject";
        case ErrorCode::UnlabeledInstance: return "UnlabeledInstance";
        case ErrorCode::UnknownTask: return "UnknownTask";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonFiniteSample: return "NonFiniteSample";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::UnsupportedWavelet:
        case ErrorCode::InvalidArgument:
            return ErrorCategory::Config;
        case ErrorCode::NoConvergence:
        case ErrorCode::DegenerateFeature:
        case ErrorCode::ConstantSignal:
        case ErrorCode::ZeroBaselineFeature:
        case ErrorCode::EmptyMatrix:
            return ErrorCategory::Numeric;
        default:
            return ErrorCategory::Data;
    }
}

constexpr std::string_view to_string(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Data: return "data";
        case ErrorCategory::Numeric: return "numeric";
    }
    return "unknown";
}

constexpr int exit_code(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Data: return 3;
        case ErrorCategory::Numeric: return 4;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

// Carries the number of peaks that were found.
class TooFewPeaksError : public Error {
public:
    TooFewPeaksError(std::size_t found, std::size_t required, const std::string& context)
        : Error(ErrorCode::TooFewPeaks, context + ": found " + std::to_string(found) +
                                            " peaks, need " + std::to_string(required)),
          found_(found) {}

    std::size_t found() const noexcept { return found_; }

private:
    std::size_t found_;
};

}  // namespace ppgnorm
