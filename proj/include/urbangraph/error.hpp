#pragma once

#include <stdexcept>
#include <string>

namespace urbangraph {

enum class ErrorKind {
  InvalidParameter,
  InvalidIndex,
  Parse,
  Data,
  Config,
  Io,
  EmptyPopulation,
  DegeneratePerturbation,
  DegenerateGroup,
  ModelDegenerate,
  Feasibility,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers dispatch on kind().
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

}  // namespace urbangraph
