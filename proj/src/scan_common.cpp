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
#include <numeric>
#include <tuple>

#include "tlsmem/error.hpp"
#include "tlsmem/scan.hpp"

namespace tlsmem {

ScanConfig ScanConfig::for_key_length(std::size_t key_len_bytes) {
  ScanConfig cfg;
  cfg.key_len_bytes = key_len_bytes;
  cfg.key_entropy_threshold = default_key_entropy_threshold(key_len_bytes);
  return cfg;
}

void ScanConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidArgument, "scan config: " + what); };
  if (key_len_bytes != 16 && key_len_bytes != 32) fail("key length must be 16 or 32");
  if (!(iv_entropy_threshold >= 0.0) || !(key_entropy_threshold >= 0.0)) fail("thresholds must be >= 0");
  if (step == 0) fail("step must be > 0");
  if (max_iv_distance < step || max_key_distance < step) fail("distances must be >= step");
}

std::string_view hypothesis_name(BlockHypothesis h) {
  return h == BlockHypothesis::IvWasClient ? "iv_was_client" : "iv_was_server";
}

std::vector<TrialPair> pair_candidates(const std::vector<CandidateKey>& keys,
                                       const std::vector<CandidateIv>& ivs) {
  if (keys.empty() || ivs.empty())
    throw Error(Errc::NoCandidates, std::to_string(keys.size()) + " keys, " + std::to_string(ivs.size()) + " IVs");

  struct Slot {
    bool cross_extract;
    std::size_t distance;
    std::size_t key_index;
    std::size_t iv_index;
  };
  std::vector<Slot> slots;
  slots.reserve(keys.size() * ivs.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    for (std::size_t v = 0; v < ivs.size(); ++v) {
      const auto& key = keys[k];
      const auto& iv = ivs[v];
      const std::size_t dist = key.offset > iv.offset ? key.offset - iv.offset : iv.offset - key.offset;
      slots.push_back({key.extract_id != iv.extract_id, dist, k, v});
    }
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return std::tie(a.cross_extract, a.distance, a.key_index, a.iv_index) <
           std::tie(b.cross_extract, b.distance, b.key_index, b.iv_index);
  });
  std::vector<TrialPair> pairs;
  pairs.reserve(slots.size());
  for (const auto& s : slots) pairs.push_back({keys[s.key_index], ivs[s.iv_index]});
  return pairs;
}

}  // namespace tlsmem
