// Copyright 2026 The attnhar Authors.
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

#ifndef ATTNHAR_ERRORS_H_
#define ATTNHAR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace attnhar {

// Base class for every error raised by the library. The kind decides the
// process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    kDimension,
    kNumeric,
    kConfig,
    kData,
    kContract,
    kParse,
    kSchema,
    kWindowTooShort,
    kUnsupportedVariant,
    kIo,
  };

  Error(Kind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

#define ATTNHAR_DEFINE_ERROR(Name, KindValue)                    \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string &message)                     \
        : Error(Kind::KindValue, message) {}                      \
  };

ATTNHAR_DEFINE_ERROR(DimensionError, kDimension)
ATTNHAR_DEFINE_ERROR(NumericError, kNumeric)
ATTNHAR_DEFINE_ERROR(ConfigError, kConfig)
ATTNHAR_DEFINE_ERROR(DataError, kData)
ATTNHAR_DEFINE_ERROR(ContractError, kContract)
ATTNHAR_DEFINE_ERROR(ParseError, kParse)
ATTNHAR_DEFINE_ERROR(SchemaError, kSchema)
ATTNHAR_DEFINE_ERROR(WindowTooShortError, kWindowTooShort)
ATTNHAR_DEFINE_ERROR(UnsupportedVariantError, kUnsupportedVariant)
ATTNHAR_DEFINE_ERROR(IoError, kIo)

#undef ATTNHAR_DEFINE_ERROR

}  // namespace attnhar

#endif  // ATTNHAR_ERRORS_H_
