#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fault2flow {

enum class ErrorKind {
  SyntaxError,
  DuplicateId,
  UnresolvedReference,
  CycleDetected,
  DivisionByZero,
  MissingParameter,
  DepthJump,
  MultipleRoots,
  InvalidAnnotation,
  UnannotatedLeaf,
  UnknownParameter,
  EmptyFaultClass,
  HookExhausted,
  ValidationFailed,
  SchemaError,
  SelfCheckFailed,
  KofnTooWide,
  MissingField,
  DanglingBranch,
  UnsatisfiableStrategy,
  EmptyTree,
  LeafCapExceeded,
  SeedInvalid,
  NotApplicable,
  NetworkError,
  AuthError,
  SchemaRejected,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnresolvedReference: return "UnresolvedReference";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::MissingParameter: return "MissingParameter";
    case ErrorKind::DepthJump: return "DepthJump";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::InvalidAnnotation: return "InvalidAnnotation";
    case ErrorKind::UnannotatedLeaf: return "UnannotatedLeaf";
    case ErrorKind::UnknownParameter: return "UnknownParameter";
    case ErrorKind::EmptyFaultClass: return "EmptyFaultClass";
    case ErrorKind::HookExhausted: return "HookExhausted";
    case ErrorKind::ValidationFailed: return "ValidationFailed";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::SelfCheckFailed: return "SelfCheckFailed";
    case ErrorKind::KofnTooWide: return "KofnTooWide";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::DanglingBranch: return "DanglingBranch";
    case ErrorKind::UnsatisfiableStrategy: return "UnsatisfiableStrategy";
    case ErrorKind::EmptyTree: return "EmptyTree";
    case ErrorKind::LeafCapExceeded: return "LeafCapExceeded";
    case ErrorKind::SeedInvalid: return "SeedInvalid";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::AuthError: return "AuthError";
    case ErrorKind::SchemaRejected: return "SchemaRejected";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the toolchain. `what()` is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// A syntax error with its 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorKind::SyntaxError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace fault2flow
