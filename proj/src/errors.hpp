#pragma once

#include <stdexcept>
#include <string>

namespace secoda {

// Base class for all library failures surfaced across the C boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV cells, schema documents, label files).
struct ParseError : Error {
  using Error::Error;
};

// Filesystem level failure: unreadable or unwritable paths.
struct IoError : Error {
  using Error::Error;
};

}  // namespace secoda
