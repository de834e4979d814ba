// Copyright 2026 The Meshfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MESHFUZZ_ERRORS_H_
#define MESHFUZZ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace meshfuzz {

// Base of every error thrown by the library. Runtime findings of the fuzz
// target (crashes, budget exhaustion, replay divergence) are data, never
// exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MESHFUZZ_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string &what)   \
        : Error(#Name ": " + what) {}        \
  }

MESHFUZZ_DEFINE_ERROR(ParseError);
MESHFUZZ_DEFINE_ERROR(ValidationError);
MESHFUZZ_DEFINE_ERROR(UnknownApp);
MESHFUZZ_DEFINE_ERROR(UnknownHandler);
MESHFUZZ_DEFINE_ERROR(DuplicateVersion);
MESHFUZZ_DEFINE_ERROR(VersionMismatch);
MESHFUZZ_DEFINE_ERROR(UnknownTrace);
MESHFUZZ_DEFINE_ERROR(IncompleteTrace);
MESHFUZZ_DEFINE_ERROR(EmptyStore);
MESHFUZZ_DEFINE_ERROR(InvalidOffset);
MESHFUZZ_DEFINE_ERROR(NoReachingSeed);
MESHFUZZ_DEFINE_ERROR(UndefinedEstimate);
MESHFUZZ_DEFINE_ERROR(StoreIoError);

#undef MESHFUZZ_DEFINE_ERROR

}  // namespace meshfuzz

#endif  // MESHFUZZ_ERRORS_H_
