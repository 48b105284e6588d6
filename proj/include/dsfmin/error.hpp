#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsfmin {

enum class ErrorKind {
    ZeroPolynomial,
    ZeroDenominator,
    ComplexPolesUnsupported,
    RepeatedPole,
    ImproperMatrix,
    EvaluationAtPole,
    SingularRationalMatrix,
    ShapeMismatch,
    RankDeficientC,
    SingularIminusQ,
    InvalidDsf,
    ResidueRankExceedsOne,
    ConflictingAssignment,
    PoleAtZeroWithoutShift,
    InvalidShift,
    ParseError,
    SchemaError,
    IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
        case ErrorKind::ZeroDenominator: return "ZeroDenominator";
        case ErrorKind::ComplexPolesUnsupported: return "ComplexPolesUnsupported";
        case ErrorKind::RepeatedPole: return "RepeatedPole";
        case ErrorKind::ImproperMatrix: return "ImproperMatrix";
        case ErrorKind::EvaluationAtPole: return "EvaluationAtPole";
        case ErrorKind::SingularRationalMatrix: return "SingularRationalMatrix";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::RankDeficientC: return "RankDeficientC";
        case ErrorKind::SingularIminusQ: return "SingularIminusQ";
        case ErrorKind::InvalidDsf: return "InvalidDsf";
        case ErrorKind::ResidueRankExceedsOne: return "ResidueRankExceedsOne";
        case ErrorKind::ConflictingAssignment: return "ConflictingAssignment";
        case ErrorKind::PoleAtZeroWithoutShift: return "PoleAtZeroWithoutShift";
        case ErrorKind::InvalidShift: return "InvalidShift";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// All library failures are reported through this exception; `kind()` is the
/// stable, machine-checkable part and `what()` carries the diagnostic.
class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for violations of the modelling assumptions (simple real poles,
    /// rank-one residues, ...) as opposed to malformed input.
    bool is_assumption_violation() const noexcept {
        switch (kind_) {
            case ErrorKind::ComplexPolesUnsupported:
            case ErrorKind::RepeatedPole:
            case ErrorKind::ImproperMatrix:
            case ErrorKind::RankDeficientC:
            case ErrorKind::SingularIminusQ:
            case ErrorKind::SingularRationalMatrix:
            case ErrorKind::InvalidDsf:
            case ErrorKind::ResidueRankExceedsOne:
            case ErrorKind::ConflictingAssignment:
            case ErrorKind::PoleAtZeroWithoutShift:
            case ErrorKind::InvalidShift:
                return true;
            default:
                return false;
        }
    }

   private:
    ErrorKind kind_;
};

}  // namespace dsfmin
