#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calderon {

enum class ErrorKind {
  precondition,
  size_limit,
  geometry,
  corkscrew,
  meshing,
  ellipticity,
  coercivity,
  solver,
  iteration,
  capability,
  parse,
  config,
  invariant,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that the command
// line front end can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::precondition, what);
}

}  // namespace calderon
