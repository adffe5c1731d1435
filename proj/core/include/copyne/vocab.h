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

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace copyne {

using TokenId = int;
using TokenSeq = std::vector<TokenId>;

/// Splits UTF-8 text into code-point strings. Throws on malformed input.
std::vector<std::string> utf8_chars(std::string_view text);

class VocabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Character vocabulary with four reserved ids in front of the content
/// characters. The decoder predicts over "classes": every id except blank
/// and bos, so class c is id c + 2.
class Vocab {
 public:
  static constexpr TokenId kBlank = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kFirstContent = 4;

  Vocab() : Vocab(std::vector<std::string>{}) {}
  explicit Vocab(std::vector<std::string> content_chars);

  std::size_t size() const { return symbols_.size(); }
  std::size_t content_size() const { return symbols_.size() - kFirstContent; }
  std::size_t decoder_classes() const { return symbols_.size() - 2; }
  static std::size_t class_of(TokenId id) { return static_cast<std::size_t>(id - 2); }
  static TokenId id_of_class(std::size_t c) { return static_cast<TokenId>(c + 2); }

  const std::string& symbol(TokenId id) const;
  bool contains(std::string_view ch) const;
  /// Unknown characters map to kUnk.
  TokenId id(std::string_view ch) const;
  TokenSeq encode(std::string_view text) const;
  /// Throws VocabError naming the first unknown character.
  TokenSeq encode_strict(std::string_view text) const;
  /// Reserved ids are dropped.
  std::string decode(std::span<const TokenId> ids) const;

  std::vector<std::string> content_chars() const;
  /// Content characters concatenated; the form stored in checkpoints.
  std::string content_string() const;

  static bool is_content(TokenId id) { return id >= kFirstContent; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace copyne
