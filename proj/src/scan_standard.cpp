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
#include <cstring>
#include <tuple>
#include <unordered_set>

#include "tlsmem/entropy.hpp"
#include "tlsmem/error.hpp"
#include "tlsmem/parallel.hpp"
#include "tlsmem/scan.hpp"

namespace tlsmem {

namespace {

std::uint32_t iv_word(const std::uint8_t* p) { return load_be32(p); }

// Exact membership for a set of 4-byte values with a 2^24-bit prefilter on
// the leading three bytes.
class IvSet {
 public:
  explicit IvSet(const std::vector<ImplicitIv>& values) : prefix_bits_((1u << 24) / 64, 0) {
    words_.reserve(values.size());
    for (const auto& v : values) {
      const std::uint32_t w = iv_word(v.data());
      words_.push_back(w);
      prefix_bits_[(w >> 8) / 64] |= std::uint64_t{1} << ((w >> 8) % 64);
    }
    std::sort(words_.begin(), words_.end());
  }

  bool contains(const std::uint8_t* p) const {
    const std::uint32_t prefix = load_be24(p);
    if (!(prefix_bits_[prefix / 64] >> (prefix % 64) & 1)) return false;
    return std::binary_search(words_.begin(), words_.end(), iv_word(p));
  }

 private:
  std::vector<std::uint64_t> prefix_bits_;
  std::vector<std::uint32_t> words_;
};

struct IvHit {
  ImplicitIv value;
  std::size_t offset;
};

bool block_less(const CandidateKeyBlock& a, const CandidateKeyBlock& b) {
  return std::tie(a.extract_id, a.offset, a.hypothesis) < std::tie(b.extract_id, b.offset, b.hypothesis);
}

}  // namespace

StandardScanResult scan_standard(const ExtractSet& extracts, const ExplicitNonce& nonce,
                                 const ScanConfig& cfg) {
  cfg.validate();
  const std::size_t k = cfg.key_len_bytes;
  const std::size_t n = extracts.size();
  StandardScanResult result;

  // 1. nonce occurrences -> candidate implicit IVs
  std::vector<std::vector<IvHit>> hits(n);
  std::vector<std::size_t> nonce_hits(n, 0);
  parallel_for(n, cfg.jobs, [&](std::size_t id) {
    ByteView data = extracts[id].view();
    const auto offsets = find_all(data, nonce);
    nonce_hits[id] = offsets.size();
    for (std::size_t o : offsets) {
      if (o < kImplicitIvLen) continue;
      ByteView iv = data.subspan(o - kImplicitIvLen, kImplicitIvLen);
      if (shannon_entropy(iv) > cfg.iv_entropy_threshold) {
        IvHit h{};
        std::copy(iv.begin(), iv.end(), h.value.begin());
        h.offset = o - kImplicitIvLen;
        hits[id].push_back(h);
      }
    }
  });

  std::vector<ImplicitIv> distinct;
  {
    std::unordered_set<std::uint32_t> seen;
    for (std::size_t id = 0; id < n; ++id) {
      result.nonce_hits += nonce_hits[id];
      result.iv_candidates += hits[id].size();
      for (const auto& h : hits[id])
        if (seen.insert(iv_word(h.value.data())).second) distinct.push_back(h.value);
    }
  }
  result.distinct_ivs = distinct.size();
  if (distinct.empty()) return result;

  // 2-3. every occurrence of a candidate IV -> two gated key-block hypotheses
  const IvSet iv_set(distinct);
  std::vector<std::vector<CandidateKeyBlock>> per_extract(n);
  parallel_for(n, cfg.jobs, [&](std::size_t id) {
    ByteView data = extracts[id].view();
    const std::uint8_t* base = data.data();
    auto key_ok = [&](std::size_t at) { return shannon_entropy(data.subspan(at, k)) > cfg.key_entropy_threshold; };
    auto emit = [&](std::size_t block, BlockHypothesis hyp) {
      if (!key_ok(block) || !key_ok(block + k)) return;
      CandidateKeyBlock b;
      b.client_key.assign(base + block, base + block + k);
      b.server_key.assign(base + block + k, base + block + 2 * k);
      std::memcpy(b.client_iv.data(), base + block + 2 * k, kImplicitIvLen);
      std::memcpy(b.server_iv.data(), base + block + 2 * k + kImplicitIvLen, kImplicitIvLen);
      b.extract_id = id;
      b.offset = block;
      b.hypothesis = hyp;
      per_extract[id].push_back(std::move(b));
    };
    if (data.size() < kImplicitIvLen) return;
    const std::size_t last = data.size() - kImplicitIvLen;
    for (std::size_t p = 0; p <= last; ++p) {
      if (!iv_set.contains(base + p)) continue;
      if (p >= 2 * k && p + 2 * kImplicitIvLen <= data.size()) emit(p - 2 * k, BlockHypothesis::IvWasClient);
      if (p >= 2 * k + kImplicitIvLen) emit(p - 2 * k - kImplicitIvLen, BlockHypothesis::IvWasServer);
    }
  });

  // 4. proximity pruning per (extract, hypothesis), lowest offset kept
  for (std::size_t id = 0; id < n; ++id) {
    auto& blocks = per_extract[id];
    result.blocks_before_pruning += blocks.size();
    std::sort(blocks.begin(), blocks.end(), block_less);
    std::optional<std::size_t> last_kept[2];
    for (auto& b : blocks) {
      auto& last = last_kept[static_cast<int>(b.hypothesis)];
      if (last && b.offset - *last < cfg.min_artefact_gap) continue;
      last = b.offset;
      result.blocks.push_back(std::move(b));
    }
  }
  std::sort(result.blocks.begin(), result.blocks.end(), block_less);
  return result;
}

StandardScanResult scan_standard(const ExtractSet& extracts, const SessionCapture& capture,
                                 const ScanConfig& cfg) {
  if (!capture.first_app_data(Direction::ClientToServer))
    throw Error(Errc::NoApplicationData, "standard scan needs a client ApplicationData record");
  return scan_standard(extracts, capture.first_explicit_nonce, cfg);
}

}  // namespace tlsmem
