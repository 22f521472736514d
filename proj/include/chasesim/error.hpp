#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chasesim {

enum class ErrorCode {
  NonPositiveLambda,
  NegativeAlpha,
  NonFinite,
  BandOnNonTorus,
  NoActiveEvents,
  ZeroVertices,
  SizeCapExceeded,
  TooSmall,
  ParseError,
  AsymmetricEdge,
  SelfLoop,
  DuplicateEdge,
  VertexOutOfRange,
  ZeroHeight,
  AlphaZero,
  NotATree,
  BadOrder,
  EmptyInput,
  BadDegree,
  BadInputs,
  NoCrossing,
  MultipleCrossings,
  DegenerateSupport,
  InvalidSpec,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::NegativeAlpha: return "NegativeAlpha";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BandOnNonTorus: return "BandOnNonTorus";
    case ErrorCode::NoActiveEvents: return "NoActiveEvents";
    case ErrorCode::ZeroVertices: return "ZeroVertices";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::AsymmetricEdge: return "AsymmetricEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::VertexOutOfRange: return "VertexOutOfRange";
    case ErrorCode::ZeroHeight: return "ZeroHeight";
    case ErrorCode::AlphaZero: return "AlphaZero";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadDegree: return "BadDegree";
    case ErrorCode::BadInputs: return "BadInputs";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::MultipleCrossings: return "MultipleCrossings";
    case ErrorCode::DegenerateSupport: return "DegenerateSupport";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failures also remember the 1-based input line.
class ParseFailure : public Error {
 public:
  ParseFailure(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace chasesim
