// Copyright 2026 The lmgeo Authors
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

#include "lmgeo/error.hpp"

namespace lmgeo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kIo:
      return "i/o error";
    case ErrorCode::kParse:
      return "parse error";
    case ErrorCode::kInsufficientData:
      return "insufficient data";
    case ErrorCode::kNonPhysical:
      return "non-physical fit";
    case ErrorCode::kNoLandmarks:
      return "no landmarks";
    case ErrorCode::kGeometry:
      return "geometry error";
  }
  return "unknown error";
}

}  // namespace lmgeo
