#pragma once

#include <stdexcept>
#include <string>

namespace torusma {

enum class Errc {
    InvalidInput,
    GridMismatch,
    OversizeMatrix,
    NonFinite,
    SizeMismatch,
    UnsupportedMeasure,
    UnsupportedSize,
    BetaZero,
    EmptySampleSet,
    NewtonDivergence,
    OutOfWindow,
    NegativeEntry,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline const char* errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidInput: return "InvalidInput";
        case Errc::GridMismatch: return "GridMismatch";
        case Errc::OversizeMatrix: return "OversizeMatrix";
        case Errc::NonFinite: return "NonFinite";
        case Errc::SizeMismatch: return "SizeMismatch";
        case Errc::UnsupportedMeasure: return "UnsupportedMeasure";
        case Errc::UnsupportedSize: return "UnsupportedSize";
        case Errc::BetaZero: return "BetaZero";
        case Errc::EmptySampleSet: return "EmptySampleSet";
        case Errc::NewtonDivergence: return "NewtonDivergence";
        case Errc::OutOfWindow: return "OutOfWindow";
        case Errc::NegativeEntry: return "NegativeEntry";
    }
    return "Error";
}

}  // namespace torusma
