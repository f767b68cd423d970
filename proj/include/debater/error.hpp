#pragma once

#include <stdexcept>
#include <string>

namespace debater {

// Input errors are malformed or out-of-contract arguments; semantic errors are
// well-formed requests the engine cannot satisfy (an abstaining classifier, a
// filter that leaves nothing). The service maps them to 400 and 422.
enum class ErrorKind { input, semantic };

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, ErrorKind kind = ErrorKind::input)
      : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

}  // namespace debater
