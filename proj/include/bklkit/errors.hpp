#pragma once

#include <stdexcept>
#include <string>

namespace bklkit {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or violated precondition (bad file, bad index, singular matrix, ...).
class InputError : public Error {
public:
  using Error::Error;
};

/// A verification step failed on well-formed input (non-admissible torsion,
/// tolerance inconsistency, normalization that does not converge).
class CheckFailure : public Error {
public:
  using Error::Error;
};

} // namespace bklkit
