// Copyright 2026 The RadioBench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RADIOBENCH_ERRORS_HPP_
#define RADIOBENCH_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace radiobench {

// Error categories surfaced by the library. The CLI maps kConfig/kShape/
// kFormat/kCorruption to exit code 2 and kNumeric/kOptimisation to 3.
enum class ErrorKind {
  kDomain,
  kDegenerateGeometry,
  kConfig,
  kShape,
  kNumeric,
  kOptimisation,
  kEstimation,
  kFormat,
  kCorruption,
  kDegenerateInput,
  kIo,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

#define RADIOBENCH_DEFINE_ERROR(Name, Kind)                              \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

RADIOBENCH_DEFINE_ERROR(DomainError, kDomain)
RADIOBENCH_DEFINE_ERROR(DegenerateGeometryError, kDegenerateGeometry)
RADIOBENCH_DEFINE_ERROR(ConfigError, kConfig)
RADIOBENCH_DEFINE_ERROR(ShapeError, kShape)
RADIOBENCH_DEFINE_ERROR(NumericError, kNumeric)
RADIOBENCH_DEFINE_ERROR(OptimisationError, kOptimisation)
RADIOBENCH_DEFINE_ERROR(EstimationError, kEstimation)
RADIOBENCH_DEFINE_ERROR(FormatError, kFormat)
RADIOBENCH_DEFINE_ERROR(CorruptionError, kCorruption)
RADIOBENCH_DEFINE_ERROR(DegenerateInputError, kDegenerateInput)
RADIOBENCH_DEFINE_ERROR(IoError, kIo)

#undef RADIOBENCH_DEFINE_ERROR

}  // namespace radiobench

#endif  // RADIOBENCH_ERRORS_HPP_
