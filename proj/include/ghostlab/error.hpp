#pragma once

#include <stdexcept>
#include <string>

namespace ghostlab {

/// Root of all errors raised by the library. Each subclass names one
/// failure family so callers (and the CLI) can report it precisely.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class BoundsError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class RegistrationError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

} // namespace ghostlab
