#pragma once

#include <stdexcept>
#include <string>

namespace embcomm {

// Invalid user-supplied input: bad parameters, malformed files, out-of-range
// ids. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal consistency check. The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace embcomm
