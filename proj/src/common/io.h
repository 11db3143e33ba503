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

#ifndef GSIM_COMMON_IO_H_
#define GSIM_COMMON_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gsim {

std::vector<uint8_t> read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Writes go through a temporary sibling and a rename so a reader never sees a
// half-written file.
void write_file(const std::filesystem::path& path,
                const std::vector<uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

// `key = value` lines; '#' starts a comment. Rendering is sorted by key.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
std::string render_key_values(const KeyValues& kv);

// Typed lookups that throw a validation error naming `where` on absence or
// malformed values.
std::string kv_string(const KeyValues& kv, const std::string& key,
                      const std::string& where);
int64_t kv_int(const KeyValues& kv, const std::string& key,
               const std::string& where);
double kv_double(const KeyValues& kv, const std::string& key,
                 const std::string& where);

// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

template <typename T>
void append_le(std::vector<uint8_t>& out, T value) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<uint8_t>(static_cast<uint64_t>(value) >> (8 * i)));
  }
}

template <typename T>
T load_le(const uint8_t* p) {
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t{p[i]} << (8 * i);
  return static_cast<T>(v);
}

}  // namespace gsim

#endif  // GSIM_COMMON_IO_H_
