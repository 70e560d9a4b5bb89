#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lorentzlab {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `offset` is the byte position of the problem.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class UnboundVariableError : public Error {
public:
  explicit UnboundVariableError(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

/// log of a nonpositive value, sqrt of a negative value, division by zero.
class DomainError : public Error {
public:
  using Error::Error;
};

/// The input violates a geometric hypothesis (signature, spacelike, dimension).
/// The CLI maps these to exit code 2.
class HypothesisError : public Error {
public:
  using Error::Error;
};

class SignatureError : public HypothesisError {
public:
  using HypothesisError::HypothesisError;
};

class NonSpacelikeError : public HypothesisError {
public:
  NonSpacelikeError(const std::string& what, std::size_t node, std::vector<double> eigenvalues)
      : HypothesisError(what), node_(node), eigenvalues_(std::move(eigenvalues)) {}
  std::size_t node() const noexcept { return node_; }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

private:
  std::size_t node_;
  std::vector<double> eigenvalues_;
};

class SingularMatrixError : public Error {
public:
  using Error::Error;
};

/// Bad or inconsistent configuration. Exit code 4.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace lorentzlab
