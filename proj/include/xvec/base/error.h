// include/xvec/base/error.h

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XVEC_BASE_ERROR_H_
#define XVEC_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace xvec {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or vector dimensions do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf values, divergence, or a numerically degenerate problem.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A sequence is too short for the network receptive field or a crop.
class InputLengthError : public Error {
 public:
  using Error::Error;
};

class BatchError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary or text file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Empty or degenerate data handed to a fitting/evaluation routine.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Writes a warning line to stderr. Tests may silence it.
void Warn(const std::string &message);
void SetWarningsEnabled(bool enabled);

}  // namespace xvec

#endif  // XVEC_BASE_ERROR_H_
