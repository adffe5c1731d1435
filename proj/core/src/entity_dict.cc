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

#include "copyne/entity_dict.h"

#include <algorithm>
#include <fstream>

namespace copyne {

EntityDict::EntityDict() : entries_{TokenSeq{}}, origins_{EntityOrigin::kNone} {}

std::optional<std::size_t> EntityDict::add(const TokenSeq& entity,
                                           EntityOrigin origin) {
  if (entity.size() < 2) {
    throw EntityDictError("entities must have at least two tokens");
  }
  for (TokenId t : entity) {
    if (!Vocab::is_content(t)) {
      throw EntityDictError("entity contains reserved token id " +
                            std::to_string(t));
    }
  }
  if (index_.contains(entity)) return std::nullopt;
  const std::size_t idx = entries_.size();
  entries_.push_back(entity);
  origins_.push_back(origin);
  index_.emplace(entity, idx);
  return idx;
}

std::optional<std::size_t> EntityDict::find(const TokenSeq& entity) const {
  auto it = index_.find(entity);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EntityDict::max_entity_length() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n = std::max(n, e.size());
  return n;
}

EntityDict load_entity_dict(const std::filesystem::path& path,
                            const Vocab& vocab,
                            std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EntityDictError("cannot open entity dictionary " + path.string());
  EntityDict dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line.empty()) throw EntityDictError(where + ": blank line");
    TokenSeq tokens;
    try {
      tokens = vocab.encode_strict(line);
    } catch (const VocabError& e) {
      throw EntityDictError(where + ": " + e.what());
    }
    if (tokens.size() < 2) {
      if (warnings) warnings->push_back(where + ": dropped single-character entity '" + line + "'");
      continue;
    }
    dict.add(tokens, EntityOrigin::kLoaded);
  }
  return dict;
}

void write_entity_list(const std::filesystem::path& path,
                       const std::vector<std::string>& entities) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EntityDictError("cannot write " + path.string());
  for (const auto& e : entities) out << e << '\n';
  if (!out) throw EntityDictError("write failed for " + path.string());
}

}  // namespace copyne
