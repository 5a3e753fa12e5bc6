#pragma once

#include <stdexcept>
#include <string>

namespace mbw {

/// Malformed input: bad file syntax, element out of range, sort errors.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured bound was exceeded (width, ground-set size, state count).
class LimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mbw
