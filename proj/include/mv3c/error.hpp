#pragma once

#include <stdexcept>
#include <string>

namespace mv3c {

enum class ErrorKind {
  usage,   // bad arguments or violated preconditions
  format,  // malformed or unsupported file contents
  data,    // invalid values inside otherwise well-formed data
  rate,    // rate target unreachable
  oracle,  // external quality oracle failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// Process exit codes used by the CLI.
inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::format:
    case ErrorKind::data: return 3;
    case ErrorKind::rate: return 4;
    case ErrorKind::oracle: return 5;
  }
  return 1;
}

}  // namespace mv3c
