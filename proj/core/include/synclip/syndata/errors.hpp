#pragma once

#include <stdexcept>
#include <string>

namespace synclip::syndata {

/// Invalid label vectors or priors.
class LabelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed corpus files: manifest records or PPM images.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace synclip::syndata
