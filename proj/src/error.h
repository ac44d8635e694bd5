// Copyright 2026 The LabelUQ Authors
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

#ifndef LABELUQ_ERROR_H_
#define LABELUQ_ERROR_H_

#include <stdexcept>
#include <string>

namespace labeluq {

// Mirrors lu_status in the C API; values must stay in sync.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kRankDeficient = 4,
  kCoverage = 5,
  kGridMismatch = 6,
  kUndefined = 7,
  kInternal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by InferPosterior when the posterior precision is singular.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, int null_dim)
      : Error(ErrorCode::kRankDeficient, what), null_dim_(null_dim) {}
  int null_dimension() const { return null_dim_; }

 private:
  int null_dim_;
};

// Raised when a grid does not cover the 3-sigma support of a distribution.
// deficit() is the largest missing extent in meters.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, double deficit)
      : Error(ErrorCode::kCoverage, what), deficit_(deficit) {}
  double deficit() const { return deficit_; }

 private:
  double deficit_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace labeluq

#endif  // LABELUQ_ERROR_H_
