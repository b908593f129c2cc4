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

#include "tlsmem/entropy.hpp"

#include <array>
#include <cmath>
#include <cstdint>

#include "tlsmem/error.hpp"

namespace tlsmem {

double shannon_entropy(ByteView segment) {
  if (segment.empty()) throw Error(Errc::EmptySegment, "entropy of an empty segment");
  // counts is left all-zero on exit so it can be reused across calls
  thread_local std::array<std::uint64_t, 256> counts{};
  std::array<std::uint8_t, 256> seen;
  std::size_t distinct = 0;
  for (auto b : segment)
    if (counts[b]++ == 0) seen[distinct++] = b;

  const double n = static_cast<double>(segment.size());
  double h = 0.0;
  for (std::size_t i = 0; i < distinct; ++i) {
    const double p = static_cast<double>(counts[seen[i]]) / n;
    h -= p * std::log2(p);
    counts[seen[i]] = 0;
  }
  return h == 0.0 ? 0.0 : h;  // no -0.0
}

std::vector<ProfilePoint> entropy_profile(ByteView data, std::size_t window, double threshold,
                                          std::size_t region_bytes) {
  if (window == 0) throw Error(Errc::InvalidArgument, "entropy profile window must be > 0");
  const std::size_t per_region = region_bytes == 0 ? 1 : (region_bytes + window - 1) / window;
  const std::size_t windows = data.size() / window;
  std::vector<ProfilePoint> out;
  out.reserve(windows / per_region + 1);
  for (std::size_t w = 0; w < windows; ++w) {
    if (w % per_region == 0) out.push_back({w * window, 0});
    if (shannon_entropy(data.subspan(w * window, window)) > threshold) ++out.back().count;
  }
  return out;
}

std::vector<ProfilePoint> entropy_profile(const MemoryExtract& extract, std::size_t window,
                                          double threshold, std::size_t region_bytes) {
  return entropy_profile(extract.view(), window, threshold, region_bytes);
}

std::string profile_csv(const ExtractSet& set, std::size_t window, double threshold,
                        std::size_t region_bytes) {
  std::string csv = "extract_name,offset,count\n";
  for (const auto& ex : set.extracts()) {
    for (const auto& pt : entropy_profile(ex, window, threshold, region_bytes)) {
      csv += ex.name;
      csv += ',';
      csv += std::to_string(pt.offset);
      csv += ',';
      csv += std::to_string(pt.count);
      csv += '\n';
    }
  }
  return csv;
}

}  // namespace tlsmem
