#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsler {

enum class ErrorKind {
  NotSquare,
  NotHermitian,
  NonFinite,
  NotPSD,
  NoConvergence,
  ShapeMismatch,
  AlgebraMismatch,
  NotPositive,
  InvalidIdeal,
  InvalidHom,
  NotSurjective,
  GlueMismatch,
  NotCompatible,
  NotPullbackBase,
  RankMismatch,
  NotCommutativeBase,
  DimensionTooSmall,
  NoCommutativeIdeal,
  HilbertizeRefused,
  ConfigInvalid,
  ConfigParse,
  UnknownCheck,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::AlgebraMismatch: return "AlgebraMismatch";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::InvalidIdeal: return "InvalidIdeal";
    case ErrorKind::InvalidHom: return "InvalidHom";
    case ErrorKind::NotSurjective: return "NotSurjective";
    case ErrorKind::GlueMismatch: return "GlueMismatch";
    case ErrorKind::NotCompatible: return "NotCompatible";
    case ErrorKind::NotPullbackBase: return "NotPullbackBase";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::NotCommutativeBase: return "NotCommutativeBase";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::NoCommutativeIdeal: return "NoCommutativeIdeal";
    case ErrorKind::HilbertizeRefused: return "HilbertizeRefused";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::UnknownCheck: return "UnknownCheck";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace finsler
