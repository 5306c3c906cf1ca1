#pragma once

#include <stdexcept>
#include <string>

namespace retain {

enum class ErrorKind {
  invalid_argument,
  conflict,
  not_found,
  parse,
  io,
};

// Single exception type for the library; `kind()` lets the service and CLI
// map failures onto status / exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace retain
