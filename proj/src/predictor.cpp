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

#include "sparsema/predictor.hpp"

#include <fstream>
#include <stdexcept>

#include "sparsema/csv.hpp"

namespace sparsema {

void write_manifest(const std::filesystem::path& dir, const std::string& kind,
                    const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ofstream out(dir / "manifest.csv");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.csv").string());
  out << "key,value\n";
  out << "format,sparsema-snapshot\n";
  out << "version," << kSnapshotVersion << '\n';
  out << "kind," << kind << '\n';
  for (const auto& [key, value] : fields) out << key << ',' << value << '\n';
}

void write_weights_csv(const std::filesystem::path& file, const std::string& value_column,
                       const PrMap& weights) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "item_id," << value_column << '\n';
  for (const auto& [item, w] : weights.sorted()) out << item << ',' << format_double(w) << '\n';
}

}  // namespace sparsema
