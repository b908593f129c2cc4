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

#ifndef TLSMEM_EXTRACTS_HPP
#define TLSMEM_EXTRACTS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tlsmem/bytes.hpp"

namespace tlsmem {

inline constexpr std::size_t kMiB = std::size_t{1} << 20;

// Size bands used to prioritise extracts. Band1 = [1 MiB, 8 MiB),
// Band2 = [0, 1 MiB), Band3 = [8 MiB, inf). Band1 is scanned first.
enum class Band { Band1 = 1, Band2 = 2, Band3 = 3 };

inline constexpr std::array<Band, 3> kBandScanOrder{Band::Band1, Band::Band2, Band::Band3};

Band band_for_size(std::size_t size_bytes);

struct MemoryExtract {
  std::size_t id = 0;
  std::string name;
  Bytes data;
  Band band = Band::Band2;

  std::size_t size_bytes() const { return data.size(); }
  ByteView view() const { return data; }
};

class ExtractSet {
 public:
  ExtractSet() = default;

  // Ids are reassigned to match position; bands are computed from size.
  explicit ExtractSet(std::vector<MemoryExtract> extracts);

  const std::vector<MemoryExtract>& extracts() const { return extracts_; }
  const MemoryExtract& operator[](std::size_t id) const { return extracts_.at(id); }
  std::size_t size() const { return extracts_.size(); }
  bool empty() const { return extracts_.empty(); }

  const std::vector<std::size_t>& band(Band b) const;

  // Extract ids in scanning priority: Band1, Band2, Band3, id order within.
  std::vector<std::size_t> priority_order() const;

  std::size_t total_bytes() const;

  // Source-region base addresses from manifest.json, when present. Metadata
  // only; scanning never consults it.
  std::map<std::string, std::uint64_t> base_addresses;

 private:
  std::vector<MemoryExtract> extracts_;
  std::map<Band, std::vector<std::size_t>> bands_;
};

inline constexpr const char* kManifestName = "manifest.json";

// Loads every regular file in `directory` except manifest.json, in
// lexicographic filename order. Zero-length files are skipped.
// Throws EmptyDirectory / UnreadableFile.
ExtractSet load_extracts(const std::string& directory);

}  // namespace tlsmem

#endif  // TLSMEM_EXTRACTS_HPP
