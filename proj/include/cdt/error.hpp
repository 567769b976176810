#pragma once

#include <stdexcept>
#include <string>

namespace cdt {

// Failure classes surfaced across the library. The C layer maps these
// one-to-one onto status codes, so keep the set small and stable.
enum class ErrorKind {
  invalid_argument,
  data,
  config,
  io,
  schema,
  oracle_transport,
  oracle_protocol,
  missing_transcript,
  internal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace cdt
