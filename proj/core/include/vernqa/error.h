// Copyright 2026 The VernQA Authors
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

#ifndef VERNQA_ERROR_H_
#define VERNQA_ERROR_H_

#include <stdexcept>
#include <string>

namespace vernqa {

// Base class for every error raised by the library. Callers that only need
// to distinguish "our failure" from a std::bad_alloc can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: corpus lines, vocabulary files, dictionary TSVs.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument was violated (bad shape, bad config, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or index file failed a version, CRC, or truncation check.
class CorruptFile : public Error {
 public:
  using Error::Error;
};

}  // namespace vernqa

#endif  // VERNQA_ERROR_H_
