#pragma once

#include <stdexcept>
#include <string>

namespace scanalr {

/// Bad user input: malformed files, invalid specs, conflicting options.
/// The CLI maps this to exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy answer
/// (non-convergence, separation, degenerate baseline).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scanalr
