#pragma once

#include <stdexcept>
#include <string>

namespace atomlight {

enum class ErrorCode {
    NonDecomposable,
    ZeroDetuning,
    SeriesDiverges,
    UnphysicalMedium,
    DegenerateGeometry,
    MixedWavenumbers,
    OutsideDomain,
    ZeroSeparation,
    BasisMismatch,
    OrderingMismatch,
    NonUniformClassicalMode,
    FrameNotOrthonormal,
    UnknownProfile,
    TooFewBatches,
    InvalidArgument,
    ConfigInvalid,
    BadParameterPath,
    AnalysisFailed,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonDecomposable: return "NonDecomposable";
    case ErrorCode::ZeroDetuning: return "ZeroDetuning";
    case ErrorCode::SeriesDiverges: return "SeriesDiverges";
    case ErrorCode::UnphysicalMedium: return "UnphysicalMedium";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::MixedWavenumbers: return "MixedWavenumbers";
    case ErrorCode::OutsideDomain: return "OutsideDomain";
    case ErrorCode::ZeroSeparation: return "ZeroSeparation";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::OrderingMismatch: return "OrderingMismatch";
    case ErrorCode::NonUniformClassicalMode: return "NonUniformClassicalMode";
    case ErrorCode::FrameNotOrthonormal: return "FrameNotOrthonormal";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::TooFewBatches: return "TooFewBatches";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BadParameterPath: return "BadParameterPath";
    case ErrorCode::AnalysisFailed: return "AnalysisFailed";
    }
    return "Unknown";
}

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

template <ErrorCode C>
class TaggedError : public Error {
public:
    explicit TaggedError(const std::string& what) : Error(C, what) {}
};

using NonDecomposable = TaggedError<ErrorCode::NonDecomposable>;
using ZeroDetuning = TaggedError<ErrorCode::ZeroDetuning>;
using SeriesDiverges = TaggedError<ErrorCode::SeriesDiverges>;
using UnphysicalMedium = TaggedError<ErrorCode::UnphysicalMedium>;
using DegenerateGeometry = TaggedError<ErrorCode::DegenerateGeometry>;
using MixedWavenumbers = TaggedError<ErrorCode::MixedWavenumbers>;
using OutsideDomain = TaggedError<ErrorCode::OutsideDomain>;
using ZeroSeparation = TaggedError<ErrorCode::ZeroSeparation>;
using BasisMismatch = TaggedError<ErrorCode::BasisMismatch>;
using OrderingMismatch = TaggedError<ErrorCode::OrderingMismatch>;
using NonUniformClassicalMode = TaggedError<ErrorCode::NonUniformClassicalMode>;
using FrameNotOrthonormal = TaggedError<ErrorCode::FrameNotOrthonormal>;
using UnknownProfile = TaggedError<ErrorCode::UnknownProfile>;
using TooFewBatches = TaggedError<ErrorCode::TooFewBatches>;
using InvalidArgument = TaggedError<ErrorCode::InvalidArgument>;
using ConfigInvalid = TaggedError<ErrorCode::ConfigInvalid>;
using BadParameterPath = TaggedError<ErrorCode::BadParameterPath>;
using AnalysisFailed = TaggedError<ErrorCode::AnalysisFailed>;

} // namespace atomlight
