// Copyright 2026 The regmosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REGMOSAIC_ERROR_HPP
#define REGMOSAIC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace regmosaic {

enum class ErrorCode {
  InvalidArgument,
  DegenerateDivisor,
  SingularTransform,
  ImageTooSmall,
  DimensionMismatch,
  EmptyOverlap,
  SingularHessian,
  DegenerateSamples,
  DisplacementTooLarge,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C layer can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace regmosaic

#endif  // REGMOSAIC_ERROR_HPP
