// Copyright 2026 The tlsmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tlsmem/extracts.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "tlsmem/error.hpp"

namespace tlsmem {

namespace fs = std::filesystem;

Band band_for_size(std::size_t size_bytes) {
  if (size_bytes < kMiB) return Band::Band2;
  if (size_bytes < 8 * kMiB) return Band::Band1;
  return Band::Band3;
}

ExtractSet::ExtractSet(std::vector<MemoryExtract> extracts) : extracts_(std::move(extracts)) {
  for (Band b : kBandScanOrder) bands_[b];
  for (std::size_t i = 0; i < extracts_.size(); ++i) {
    extracts_[i].id = i;
    extracts_[i].band = band_for_size(extracts_[i].size_bytes());
    bands_[extracts_[i].band].push_back(i);
  }
}

const std::vector<std::size_t>& ExtractSet::band(Band b) const {
  static const std::vector<std::size_t> kNone;
  auto it = bands_.find(b);
  return it == bands_.end() ? kNone : it->second;
}

std::vector<std::size_t> ExtractSet::priority_order() const {
  std::vector<std::size_t> order;
  order.reserve(extracts_.size());
  for (Band b : kBandScanOrder) {
    const auto& ids = band(b);
    order.insert(order.end(), ids.begin(), ids.end());
  }
  return order;
}

std::size_t ExtractSet::total_bytes() const {
  return std::accumulate(extracts_.begin(), extracts_.end(), std::size_t{0},
                         [](std::size_t acc, const MemoryExtract& e) { return acc + e.size_bytes(); });
}

ExtractSet load_extracts(const std::string& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw Error(Errc::UnreadableFile, directory + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == kManifestName) continue;
    files.push_back(entry.path());
  }
  if (files.empty()) throw Error(Errc::EmptyDirectory, directory);
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  std::vector<MemoryExtract> extracts;
  for (const auto& path : files) {
    MemoryExtract ex;
    ex.name = path.filename().string();
    ex.data = read_file(path.string());
    if (ex.data.empty()) continue;
    extracts.push_back(std::move(ex));
  }
  if (extracts.empty()) throw Error(Errc::EmptyDirectory, directory + " holds only empty files");

  ExtractSet set(std::move(extracts));
  const fs::path manifest = fs::path(directory) / kManifestName;
  if (fs::exists(manifest)) {
    const Bytes raw = read_file(manifest.string());
    auto doc = nlohmann::json::parse(raw.begin(), raw.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      throw Error(Errc::UnreadableFile, manifest.string() + ": not a JSON object");
    for (auto& [name, value] : doc.items()) {
      if (value.is_number_unsigned())
        set.base_addresses[name] = value.get<std::uint64_t>();
      else if (value.is_string()) {
        try {
          set.base_addresses[name] = std::stoull(value.get<std::string>(), nullptr, 0);
        } catch (const std::logic_error&) {
          throw Error(Errc::UnreadableFile, manifest.string() + ": bad address for " + name);
        }
      }
    }
  }
  return set;
}

}  // namespace tlsmem
