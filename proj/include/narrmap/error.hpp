#pragma once

#include <stdexcept>
#include <string>

namespace narrmap {

enum class ErrorKind {
  invalid_input,  // malformed data or parameters
  not_found,      // unknown id / edge / cluster
  conflict,       // resource in the wrong state
  infeasible,     // parameters cannot be satisfied (e.g. K > N)
  cancelled,
  internal,       // broken invariant; a bug, not a user error
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace narrmap
