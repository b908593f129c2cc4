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

#ifndef TLSMEM_ENTROPY_HPP
#define TLSMEM_ENTROPY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "tlsmem/bytes.hpp"
#include "tlsmem/extracts.hpp"

namespace tlsmem {

// Shannon entropy of the byte histogram of `segment`, in bits per symbol.
// Always within [0, min(8, log2(size))]. Throws EmptySegment.
double shannon_entropy(ByteView segment);

struct ProfilePoint {
  std::size_t offset = 0;  // start of the region
  std::size_t count = 0;   // windows in the region with entropy > threshold

  bool operator==(const ProfilePoint&) const = default;
};

// Splits `data` into non-overlapping windows of `window` bytes (a trailing
// partial window is ignored) and counts, per region of `region_bytes`,
// how many windows exceed `threshold`. `region_bytes` is rounded up to a
// multiple of `window`; 0 means one region per window.
std::vector<ProfilePoint> entropy_profile(ByteView data, std::size_t window, double threshold,
                                          std::size_t region_bytes = 0);

std::vector<ProfilePoint> entropy_profile(const MemoryExtract& extract, std::size_t window,
                                          double threshold, std::size_t region_bytes = 0);

// CSV with header `extract_name,offset,count`.
std::string profile_csv(const ExtractSet& set, std::size_t window, double threshold,
                        std::size_t region_bytes = 0);

}  // namespace tlsmem

#endif  // TLSMEM_ENTROPY_HPP
