#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace uhd {

// Exit-code taxonomy shared by the library and the CLI:
//   2 = invalid input (bad parameters, malformed config, shape mismatch)
//   3 = numerical failure (conditioning, convergence, degeneracy)
//   4 = I/O failure (missing file, bad magic, short read)
class Error : public std::runtime_error {
 public:
  int exit_code() const noexcept { return code_; }

 protected:
  Error(const std::string& msg, int code) : std::runtime_error(msg), code_(code) {}

 private:
  int code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg, std::string field = {})
      : Error(field.empty() ? msg : field + ": " + msg, 2), field_(std::move(field)) {}

  // Dotted path of the offending config field ("state.eta0"), empty if n/a.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace uhd
