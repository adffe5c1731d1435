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

#include "copyne/vocab.h"

namespace copyne {

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (lead < 0x80) {
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    } else {
      throw VocabError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > text.size()) {
      throw VocabError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        throw VocabError("invalid UTF-8 continuation at offset " +
                         std::to_string(i + k));
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Vocab::Vocab(std::vector<std::string> content_chars)
    : symbols_{"<blank>", "<s>", "</s>", "<unk>"} {
  for (TokenId id = 0; id < kFirstContent; ++id) ids_.emplace(symbols_[id], id);
  for (auto& ch : content_chars) {
    if (utf8_chars(ch).size() != 1) {
      throw VocabError("vocabulary entry '" + ch + "' is not one character");
    }
    if (ids_.contains(ch)) {
      throw VocabError("duplicate vocabulary entry '" + ch + "'");
    }
    ids_.emplace(ch, static_cast<TokenId>(symbols_.size()));
    symbols_.push_back(std::move(ch));
  }
}

const std::string& Vocab::symbol(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw VocabError("token id " + std::to_string(id) + " out of range");
  }
  return symbols_[id];
}

bool Vocab::contains(std::string_view ch) const {
  auto it = ids_.find(std::string(ch));
  return it != ids_.end() && it->second >= kFirstContent;
}

TokenId Vocab::id(std::string_view ch) const {
  auto it = ids_.find(std::string(ch));
  if (it == ids_.end() || it->second < kFirstContent) return kUnk;
  return it->second;
}

TokenSeq Vocab::encode(std::string_view text) const {
  TokenSeq out;
  for (const auto& ch : utf8_chars(text)) out.push_back(id(ch));
  return out;
}

TokenSeq Vocab::encode_strict(std::string_view text) const {
  TokenSeq out;
  for (const auto& ch : utf8_chars(text)) {
    const TokenId t = id(ch);
    if (t == kUnk) {
      throw VocabError("character '" + ch + "' is not in the vocabulary");
    }
    out.push_back(t);
  }
  return out;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId t : ids) {
    if (is_content(t)) out += symbol(t);
  }
  return out;
}

std::vector<std::string> Vocab::content_chars() const {
  return {symbols_.begin() + kFirstContent, symbols_.end()};
}

std::string Vocab::content_string() const {
  std::string out;
  for (std::size_t i = kFirstContent; i < symbols_.size(); ++i) out += symbols_[i];
  return out;
}

}  // namespace copyne
