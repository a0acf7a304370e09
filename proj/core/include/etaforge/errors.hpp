#pragma once

#include <stdexcept>
#include <string>

namespace etaforge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct NotInvertible : Error { using Error::Error; };
struct NotDiagonalizable : Error { using Error::Error; };
struct NotEquivariant : Error { using Error::Error; };
struct NotOdd : Error { using Error::Error; };
struct NearSpectrum : Error { using Error::Error; };
struct ContourHitsSpectrum : Error { using Error::Error; };
struct GapViolation : Error { using Error::Error; };
struct GapClosed : Error {
    double r;
    explicit GapClosed(double r_, const std::string& msg) : Error(msg), r(r_) {}
};
struct QuadratureNotConverged : Error { using Error::Error; };
struct TermCapExceeded : Error { using Error::Error; };
struct ClosureExceeded : Error { using Error::Error; };
struct NoAdmissibleEps : Error { using Error::Error; };

struct TwoDFactors : Error { using Error::Error; };
struct AlreadyHasD : Error { using Error::Error; };
struct NonzeroResidual : Error { using Error::Error; };
struct SyntaxError : Error {
    std::size_t pos;
    SyntaxError(std::size_t pos_, const std::string& msg) : Error(msg), pos(pos_) {}
};

struct ConfigError : Error { using Error::Error; };
struct ScenarioFailed : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace etaforge
