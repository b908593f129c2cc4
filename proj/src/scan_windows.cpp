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

#include <algorithm>
#include <set>
#include <tuple>

#include "tlsmem/entropy.hpp"
#include "tlsmem/parallel.hpp"
#include "tlsmem/scan.hpp"

namespace tlsmem {

namespace {

struct ExtractFindings {
  std::vector<CandidateIv> ivs;
  std::vector<CandidateKey> keys;
  bool has_key_marker = false;
  std::size_t ssl3 = 0;
  std::size_t mssk = 0;
  std::size_t windows = 0;
};

ExtractFindings scan_one(const MemoryExtract& ex, const ScanConfig& cfg) {
  ExtractFindings f;
  ByteView data = ex.view();
  const auto key_markers = find_all(data, kMssKMarker);
  if (key_markers.empty()) return f;
  f.has_key_marker = true;

  const auto iv_markers = find_all(data, kSsl3Marker);
  f.ssl3 = iv_markers.size();
  for (std::size_t m : iv_markers) {
    const std::size_t start = m + kSsl3Marker.size();
    for (std::size_t d = 0; d < cfg.max_iv_distance; d += cfg.step) {
      if (start + d + kImplicitIvLen > data.size()) break;
      ByteView w = data.subspan(start + d, kImplicitIvLen);
      ++f.windows;
      const double h = shannon_entropy(w);
      if (h <= cfg.iv_entropy_threshold) continue;
      CandidateIv iv;
      std::copy(w.begin(), w.end(), iv.value.begin());
      iv.extract_id = ex.id;
      iv.offset = start + d;
      iv.entropy = h;
      f.ivs.push_back(iv);
    }
  }

  f.mssk = key_markers.size();
  for (std::size_t m : key_markers) {
    const std::size_t start = m + kMssKMarker.size();
    for (std::size_t d = 0; d < cfg.max_key_distance; d += cfg.step) {
      if (start + d + cfg.key_len_bytes > data.size()) break;
      ByteView w = data.subspan(start + d, cfg.key_len_bytes);
      ++f.windows;
      const double h = shannon_entropy(w);
      if (h <= cfg.key_entropy_threshold) continue;
      CandidateKey key;
      key.value.assign(w.begin(), w.end());
      key.extract_id = ex.id;
      key.offset = start + d;
      key.entropy = h;
      f.keys.push_back(std::move(key));
    }
  }
  return f;
}

template <typename T>
bool by_location(const T& a, const T& b) {
  return std::tie(a.extract_id, a.offset) < std::tie(b.extract_id, b.offset);
}

}  // namespace

WindowsScanResult scan_windows(const ExtractSet& extracts, const ScanConfig& cfg) {
  cfg.validate();
  std::vector<ExtractFindings> findings(extracts.size());
  parallel_for(extracts.size(), cfg.jobs, [&](std::size_t id) { findings[id] = scan_one(extracts[id], cfg); });

  WindowsScanResult result;
  std::set<ImplicitIv> seen_ivs;
  std::set<Bytes> seen_keys;
  for (std::size_t id : extracts.priority_order()) {
    auto& f = findings[id];
    result.extracts_with_key_marker += f.has_key_marker ? 1 : 0;
    result.ssl3_markers_visited += f.ssl3;
    result.mssk_markers_visited += f.mssk;
    result.windows_evaluated += f.windows;
    for (auto& iv : f.ivs)
      if (seen_ivs.insert(iv.value).second) result.ivs.push_back(iv);
    for (auto& key : f.keys)
      if (seen_keys.insert(key.value).second) result.keys.push_back(std::move(key));
  }
  std::sort(result.ivs.begin(), result.ivs.end(), by_location<CandidateIv>);
  std::sort(result.keys.begin(), result.keys.end(), by_location<CandidateKey>);
  return result;
}

}  // namespace tlsmem
