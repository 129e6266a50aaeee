#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slc {

enum class ErrorKind {
  // term construction
  InvalidIndex,
  InvalidProbability,
  EmptyDistribution,
  // reductions
  NonClosedArgument,
  NotAnAbstraction,
  IndexUnderflow,
  GuardViolation,
  NotBetaRedex,
  NotGammaLRedex,
  NotGammaRRedex,
  NotEtaRedex,
  // evaluation
  FreeVariable,
  FuelExhausted,
  NotAFunction,
  // bayesian networks
  CycleDetected,
  UnknownParent,
  UnknownNode,
  BadCptShape,
  BadProbability,
  DuplicateName,
  BadDocument,
  AllMassConditioned,
  TooLarge,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ErrorKind::NonClosedArgument: return "NonClosedArgument";
    case ErrorKind::NotAnAbstraction: return "NotAnAbstraction";
    case ErrorKind::IndexUnderflow: return "IndexUnderflow";
    case ErrorKind::GuardViolation: return "GuardViolation";
    case ErrorKind::NotBetaRedex: return "NotBetaRedex";
    case ErrorKind::NotGammaLRedex: return "NotGammaLRedex";
    case ErrorKind::NotGammaRRedex: return "NotGammaRRedex";
    case ErrorKind::NotEtaRedex: return "NotEtaRedex";
    case ErrorKind::FreeVariable: return "FreeVariable";
    case ErrorKind::FuelExhausted: return "FuelExhausted";
    case ErrorKind::NotAFunction: return "NotAFunction";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownParent: return "UnknownParent";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::BadCptShape: return "BadCptShape";
    case ErrorKind::BadProbability: return "BadProbability";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::BadDocument: return "BadDocument";
    case ErrorKind::AllMassConditioned: return "AllMassConditioned";
    case ErrorKind::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Byte range into the source text a parse diagnostic refers to.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

enum class ParseErrorKind {
  UnexpectedToken,
  BadProbability,
  EmptyDistribution,
  UnbalancedDelimiter,
  ZeroIndex,
};

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::UnexpectedToken: return "UnexpectedToken";
    case ParseErrorKind::BadProbability: return "BadProbability";
    case ParseErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ParseErrorKind::UnbalancedDelimiter: return "UnbalancedDelimiter";
    case ParseErrorKind::ZeroIndex: return "ZeroIndex";
  }
  return "Unknown";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        span_(span) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  SourceSpan span() const noexcept { return span_; }

 private:
  ParseErrorKind kind_;
  SourceSpan span_;
};

}  // namespace slc
