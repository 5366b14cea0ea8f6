#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Broad failure classes. The command-line tool maps each to its own exit code.
enum class ErrorKind {
  Config,     ///< invalid parameters or config documents
  Format,     ///< malformed or incompatible files / streams
  Numerical,  ///< fits that do not converge, domain errors in physics models
  Contract,   ///< caller broke a documented precondition (e.g. unsorted input)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace spdc
