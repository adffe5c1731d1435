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
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "copyne/vocab.h"

namespace copyne {

class EntityDictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntityOrigin { kNone, kGold, kPseudo, kNegative, kLoaded };

/// Ordered, deduplicated entity list. Index 0 is always the no-copy entry,
/// which has no tokens. Every other entry has at least two content tokens.
class EntityDict {
 public:
  EntityDict();

  /// Appends a new entry and returns its index, or nullopt when the entry
  /// is already present. Throws on entries shorter than two tokens or
  /// containing reserved ids.
  std::optional<std::size_t> add(const TokenSeq& entity, EntityOrigin origin);

  /// Entries including the no-copy slot.
  std::size_t size() const { return entries_.size(); }
  std::size_t entity_count() const { return entries_.size() - 1; }
  const TokenSeq& entry(std::size_t index) const { return entries_.at(index); }
  EntityOrigin origin(std::size_t index) const { return origins_.at(index); }
  std::optional<std::size_t> find(const TokenSeq& entity) const;
  bool contains(const TokenSeq& entity) const { return find(entity).has_value(); }
  const std::vector<TokenSeq>& entries() const { return entries_; }
  std::size_t max_entity_length() const;

 private:
  std::vector<TokenSeq> entries_;
  std::vector<EntityOrigin> origins_;
  std::map<TokenSeq, std::size_t> index_;
};

/// One entity per line, UTF-8. Duplicates are dropped silently; length-1
/// entries are dropped with a warning; blank lines and out-of-vocabulary
/// characters are errors.
EntityDict load_entity_dict(const std::filesystem::path& path,
                            const Vocab& vocab,
                            std::vector<std::string>* warnings = nullptr);

void write_entity_list(const std::filesystem::path& path,
                       const std::vector<std::string>& entities);

}  // namespace copyne
