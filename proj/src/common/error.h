// Copyright 2026 The gsim Authors
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

#ifndef GSIM_COMMON_ERROR_H_
#define GSIM_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace gsim {

// Coarse failure classes. The numeric values double as CLI exit codes and
// as C API status codes, so keep them in sync with include/gsim/gsim.h.
enum class ErrorCategory {
  kValidation = 1,  // bad description, plan, config or argument
  kSimulation = 2,  // deadlock, routing fault, arithmetic fault at run time
  kIo = 3,          // missing or unreadable file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& detail)
      : std::runtime_error(kind + ": " + detail),
        category_(category),
        kind_(std::move(kind)),
        detail_(detail) {}

  ErrorCategory category() const { return category_; }
  // Short diagnostic category, e.g. "routing fault".
  const std::string& kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCategory category_;
  std::string kind_;
  std::string detail_;
};

inline Error validation_error(const std::string& kind,
                              const std::string& detail) {
  return Error(ErrorCategory::kValidation, kind, detail);
}
inline Error simulation_error(const std::string& kind,
                              const std::string& detail) {
  return Error(ErrorCategory::kSimulation, kind, detail);
}
inline Error io_error(const std::string& detail) {
  return Error(ErrorCategory::kIo, "i/o error", detail);
}

}  // namespace gsim

#endif  // GSIM_COMMON_ERROR_H_
