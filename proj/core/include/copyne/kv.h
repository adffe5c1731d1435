// Copyright 2026 The CopyNE Authors
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

// Flat key=value text: one pair per line, '#' starts a comment.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace copyne {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

/// Later duplicates override earlier ones. Throws ConfigError with the
/// line number on a line that is neither blank, a comment, nor key=value.
KeyValues parse_key_values(std::string_view text, const std::string& source);

std::size_t kv_size(const std::string& key, const std::string& value);
std::uint64_t kv_u64(const std::string& key, const std::string& value);
double kv_double(const std::string& key, const std::string& value);
bool kv_bool(const std::string& key, const std::string& value);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace copyne
