#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ekramers {

enum class ErrorKind {
    InvalidArgument,
    NotFound,
    MissingTransverse,
    NonFiniteValue,
    SingularDiffusion,
    BlowUp,
    NoConvergence,
    WrongBasin,
    NotASaddle,
    ComplexUnstableEigenvalue,
    DegenerateHessian,
    ResonantSpectrum,
    WrongSignature,
    UnreachablePoint,
    UnreachableBoundary,
    CharacteristicPoint,
    NonSmoothQuasipotential,
    AllCensored,
    InsufficientRegime,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::MissingTransverse: return "MissingTransverse";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::SingularDiffusion: return "SingularDiffusion";
        case ErrorKind::BlowUp: return "BlowUp";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::WrongBasin: return "WrongBasin";
        case ErrorKind::NotASaddle: return "NotASaddle";
        case ErrorKind::ComplexUnstableEigenvalue: return "ComplexUnstableEigenvalue";
        case ErrorKind::DegenerateHessian: return "DegenerateHessian";
        case ErrorKind::ResonantSpectrum: return "ResonantSpectrum";
        case ErrorKind::WrongSignature: return "WrongSignature";
        case ErrorKind::UnreachablePoint: return "UnreachablePoint";
        case ErrorKind::UnreachableBoundary: return "UnreachableBoundary";
        case ErrorKind::CharacteristicPoint: return "CharacteristicPoint";
        case ErrorKind::NonSmoothQuasipotential: return "NonSmoothQuasipotential";
        case ErrorKind::AllCensored: return "AllCensored";
        case ErrorKind::InsufficientRegime: return "InsufficientRegime";
    }
    return "Unknown";
}

/// True for failures of a modelling assumption (as opposed to a numerical
/// breakdown or a bad argument).
constexpr bool is_assumption_failure(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MissingTransverse:
        case ErrorKind::WrongBasin:
        case ErrorKind::NotASaddle:
        case ErrorKind::ComplexUnstableEigenvalue:
        case ErrorKind::DegenerateHessian:
        case ErrorKind::ResonantSpectrum:
        case ErrorKind::WrongSignature:
        case ErrorKind::UnreachablePoint:
        case ErrorKind::UnreachableBoundary:
        case ErrorKind::CharacteristicPoint:
        case ErrorKind::NonSmoothQuasipotential:
        case ErrorKind::InsufficientRegime:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ekramers
