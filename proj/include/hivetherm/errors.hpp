#pragma once

#include <stdexcept>
#include <string>

namespace hivetherm {

enum class Err {
    InvalidArgument,
    InvalidConfig,
    TreatedPeriFullyMissing,
    NumericalOverflow,
    EmptySegment,
    TooFewObservations,
    NoConvergence,
    AllDegenerate,
    InsufficientDays,
    NoOverlap,
    HorizonForcingMissing,
    InsufficientHistory,
    ParseError,
    MisalignedSensors,
};

inline const char* to_string(Err e) {
    switch (e) {
    case Err::InvalidArgument:         return "InvalidArgument";
    case Err::InvalidConfig:           return "InvalidConfig";
    case Err::TreatedPeriFullyMissing: return "TreatedPeriFullyMissing";
    case Err::NumericalOverflow:       return "NumericalOverflow";
    case Err::EmptySegment:            return "EmptySegment";
    case Err::TooFewObservations:      return "TooFewObservations";
    case Err::NoConvergence:           return "NoConvergence";
    case Err::AllDegenerate:           return "AllDegenerate";
    case Err::InsufficientDays:        return "InsufficientDays";
    case Err::NoOverlap:               return "NoOverlap";
    case Err::HorizonForcingMissing:   return "HorizonForcingMissing";
    case Err::InsufficientHistory:     return "InsufficientHistory";
    case Err::ParseError:              return "ParseError";
    case Err::MisalignedSensors:       return "MisalignedSensors";
    }
    return "Unknown";
}

/// Library-wide exception carrying a machine-readable error code.
class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

    Err code() const noexcept { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, Err code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

} // namespace hivetherm
