#pragma once

#include <stdexcept>
#include <string>

namespace fuzzypov {

// Invalid user input: malformed CSV rows, impossible parameters, degenerate
// data an estimator cannot work with. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative routine failed to converge. The CLI maps this to exit code 1.
class ComputationError : public std::runtime_error {
 public:
  explicit ComputationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fuzzypov
