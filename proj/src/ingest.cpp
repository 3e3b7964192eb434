/*
 * Copyright 2026 The Sparsema Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "sparsema/harness.hpp"

namespace sparsema {
namespace {

class Interner {
 public:
  explicit Interner(std::vector<std::string>& vocab) : vocab_(vocab) {}

  ItemId intern(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, static_cast<ItemId>(vocab_.size()));
    if (inserted) vocab_.push_back(token);
    return it->second;
  }

 private:
  std::unordered_map<std::string, ItemId> ids_;
  std::vector<std::string>& vocab_;
};

}  // namespace

LineMode parse_line_mode(const std::string& name) {
  if (name == "flat") return LineMode::kFlat;
  if (name == "tokens") return LineMode::kTokens;
  if (name == "chars") return LineMode::kChars;
  throw ConfigError("unknown line mode '" + name + "' (expected flat, tokens or chars)");
}

Ingested ingest(const std::filesystem::path& path, LineMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read input file: " + path.string());
  Ingested out;
  Interner interner(out.vocab);
  if (mode == LineMode::kFlat) out.segments.emplace_back();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    switch (mode) {
      case LineMode::kFlat:
        out.segments.front().push_back(interner.intern(line));
        break;
      case LineMode::kTokens: {
        std::istringstream words(line);
        std::vector<ItemId> seg;
        std::string tok;
        while (words >> tok) seg.push_back(interner.intern(tok));
        if (!seg.empty()) out.segments.push_back(std::move(seg));
        break;
      }
      case LineMode::kChars: {
        std::vector<ItemId> seg;
        for (char c : line) seg.push_back(interner.intern(std::string(1, c)));
        out.segments.push_back(std::move(seg));
        break;
      }
    }
  }
  if (in.bad()) throw std::runtime_error("error reading input file: " + path.string());
  return out;
}

std::vector<ItemId> ingest_sequence(const std::filesystem::path& path) {
  return std::move(ingest(path, LineMode::kFlat).segments.front());
}

}  // namespace sparsema
