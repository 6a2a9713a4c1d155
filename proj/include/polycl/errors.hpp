//
// PolyCL desk - contrastive polymer representation learning
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLYCL_ERRORS_HPP_
#define POLYCL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polycl {

// Base of everything the library throws. The CLI maps the three families
// below onto exit codes 2 (config), 3 (data/checkpoint), and 4 (numeric).
class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError: public Error {
public:
  using Error::Error;
};

class DataError: public Error {
public:
  using Error::Error;
};

class NumericError: public Error {
public:
  using Error::Error;
};

// SMILES grammar violation. offset is the byte position in the input.
class SyntaxError: public DataError {
public:
  SyntaxError(std::size_t offset, const std::string &what)
      : DataError("syntax error at offset " + std::to_string(offset) + ": "
                  + what),
        offset_(offset) { }

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class ValenceError: public DataError {
public:
  using DataError::DataError;
};

class InvalidRatio: public DataError {
public:
  using DataError::DataError;
};

class EmptyResult: public DataError {
public:
  using DataError::DataError;
};

class SequenceTooLong: public DataError {
public:
  using DataError::DataError;
};

class UnknownTokenId: public DataError {
public:
  using DataError::DataError;
};

class CheckpointError: public DataError {
public:
  using DataError::DataError;
};

class ZeroVector: public NumericError {
public:
  using NumericError::NumericError;
};

class NonPositiveTemperature: public NumericError {
public:
  using NumericError::NumericError;
};

class NonFiniteLoss: public NumericError {
public:
  using NumericError::NumericError;
};

class EmptySet: public NumericError {
public:
  using NumericError::NumericError;
};

class TooFewPoints: public NumericError {
public:
  using NumericError::NumericError;
};

class ConstantTarget: public NumericError {
public:
  using NumericError::NumericError;
};

class DatasetTooSmall: public DataError {
public:
  using DataError::DataError;
};

}  // namespace polycl

#endif  // POLYCL_ERRORS_HPP_
