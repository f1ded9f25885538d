#ifndef CTSIM_ERROR_HPP
#define CTSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ctsim {

// Base class for everything the engine throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input text (JSONL, config, CSV) is syntactically broken.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctsim

#endif
