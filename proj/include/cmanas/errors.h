// Copyright 2026 The cmanas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CMANAS_ERRORS_H_
#define CMANAS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cmanas {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search space, parameter set or configuration violates its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical precondition failures (asymmetric covariance, non-finite values).
class NumericError : public Error {
 public:
  using Error::Error;
};

// An evaluator produced a NaN or infinite fitness.
class NonFiniteFitnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A canonical key does not describe a genotype of the given space.
class InvalidKeyError : public Error {
 public:
  using Error::Error;
};

// Base for failures coming out of a fitness backend.
class EvaluatorError : public Error {
 public:
  using Error::Error;
};

class MissingEntryError : public EvaluatorError {
 public:
  using EvaluatorError::EvaluatorError;
};

// Benchmark / trace file problems. Each malformation has its own type so
// callers (and tests) can tell them apart.
class FileFormatError : public EvaluatorError {
 public:
  using EvaluatorError::EvaluatorError;
};

class MalformedJsonError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class UnknownOperationError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class FitnessOutOfRangeError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class DuplicateKeyError : public FileFormatError {
 public:
  using FileFormatError::FileFormatError;
};

class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

// Raised by analysis routines that need per-generation mean snapshots.
class MissingSnapshotError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmanas

#endif  // CMANAS_ERRORS_H_
