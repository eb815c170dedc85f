#pragma once

#include <stdexcept>
#include <string>

namespace hmpnn {

// Bad inputs: malformed configs, schema violations, out-of-range ids,
// shape mismatches. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime numeric trouble: non-finite losses, failed tolerance checks.
// The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hmpnn
