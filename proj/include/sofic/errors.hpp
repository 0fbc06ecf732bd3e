#pragma once

#include <stdexcept>
#include <string>

namespace sofic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied input does not hold (bad label, bad
/// parameter range, malformed file or config).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A configured size cap (vertex count, group order, dense dimension) would
/// be exceeded.
class ResourceLimit : public Error {
public:
  using Error::Error;
};

/// Non-finite input or a failed numerical consistency check.
class NumericFailure : public Error {
public:
  using Error::Error;
};

} // namespace sofic
