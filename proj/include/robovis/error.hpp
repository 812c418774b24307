#pragma once

#include <stdexcept>
#include <string>

namespace robovis {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A window, rectangle or coordinate fell outside the raster it addresses.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry: collinear points, singular normal equations, bad calibration.
class SingularError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when one applies.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, int line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace robovis
