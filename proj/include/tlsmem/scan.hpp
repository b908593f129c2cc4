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

#ifndef TLSMEM_SCAN_HPP
#define TLSMEM_SCAN_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tlsmem/bytes.hpp"
#include "tlsmem/capture.hpp"
#include "tlsmem/extracts.hpp"

namespace tlsmem {

inline constexpr std::array<std::uint8_t, 4> kSsl3Marker{'3', 'L', 'L', 'S'};  // "SSL3" little-endian
inline constexpr std::array<std::uint8_t, 4> kMssKMarker{'K', 'S', 'S', 'M'};  // "MSSK" little-endian

inline double default_key_entropy_threshold(std::size_t key_len_bytes) {
  return 0.9 * std::log2(static_cast<double>(key_len_bytes));
}

struct ScanConfig {
  std::size_t key_len_bytes = 32;
  double iv_entropy_threshold = 1.5;
  double key_entropy_threshold = default_key_entropy_threshold(32);
  std::size_t max_iv_distance = 64;
  std::size_t max_key_distance = 128;
  std::size_t step = 4;
  std::size_t min_artefact_gap = 1000;
  std::uint64_t counter_nonce_bound = kDefaultCounterNonceBound;
  // Worker threads for per-extract scanning; output never depends on it.
  unsigned jobs = 1;

  static ScanConfig for_key_length(std::size_t key_len_bytes);

  // Throws InvalidArgument when an invariant does not hold.
  void validate() const;
};

struct CandidateIv {
  ImplicitIv value{};
  std::size_t extract_id = 0;
  std::size_t offset = 0;
  double entropy = 0.0;

  bool operator==(const CandidateIv&) const = default;
};

struct CandidateKey {
  Bytes value;
  std::size_t extract_id = 0;
  std::size_t offset = 0;
  double entropy = 0.0;

  bool operator==(const CandidateKey&) const = default;
};

// Which key-block IV slot the scanned implicit IV was assumed to occupy.
enum class BlockHypothesis { IvWasClient, IvWasServer };

std::string_view hypothesis_name(BlockHypothesis h);

// Layout client_key || server_key || client_iv || server_iv (no MAC keys).
struct CandidateKeyBlock {
  Bytes client_key;
  Bytes server_key;
  ImplicitIv client_iv{};
  ImplicitIv server_iv{};
  std::size_t extract_id = 0;
  std::size_t offset = 0;  // of client_key
  BlockHypothesis hypothesis = BlockHypothesis::IvWasClient;

  bool operator==(const CandidateKeyBlock&) const = default;
};

struct StandardScanResult {
  std::vector<CandidateKeyBlock> blocks;  // sorted by (extract_id, offset, hypothesis)
  std::size_t nonce_hits = 0;             // occurrences of the explicit nonce
  std::size_t iv_candidates = 0;          // hits whose preceding 4 bytes pass the IV gate
  std::size_t distinct_ivs = 0;
  std::size_t blocks_before_pruning = 0;
};

// Key-block scan driven by the first client explicit nonce:
//  1. every occurrence of the nonce at offset o yields the 4 bytes at
//     [o-4, o) as a candidate implicit IV if they pass the IV gate;
//  2. every occurrence p of each distinct candidate IV yields two blocks,
//     one assuming the IV sits in the client slot (keys at p-2k, p-k) and
//     one assuming the server slot (keys at p-2k-4, p-k-4);
//  3. blocks whose two keys both pass the key gate are kept;
//  4. within one extract and hypothesis, a block closer than
//     min_artefact_gap to the previously kept one is dropped.
StandardScanResult scan_standard(const ExtractSet& extracts, const ExplicitNonce& nonce,
                                 const ScanConfig& cfg);

StandardScanResult scan_standard(const ExtractSet& extracts, const SessionCapture& capture,
                                 const ScanConfig& cfg);

struct WindowsScanResult {
  std::vector<CandidateKey> keys;  // deduplicated by value, sorted by (extract_id, offset)
  std::vector<CandidateIv> ivs;
  std::size_t extracts_with_key_marker = 0;
  std::size_t ssl3_markers_visited = 0;
  std::size_t mssk_markers_visited = 0;
  std::size_t windows_evaluated = 0;
};

// Marker scan over extracts in band priority order. Only extracts that
// contain the key marker are considered; for each of their IV markers,
// 4-byte windows starting at the marker end, then every `step` bytes below
// max_iv_distance, are IV candidates when they pass the IV gate; likewise
// key_len windows after each key marker up to max_key_distance. The first
// sighting of a value (in priority order) is the one reported.
WindowsScanResult scan_windows(const ExtractSet& extracts, const ScanConfig& cfg);

struct TrialPair {
  CandidateKey key;
  CandidateIv iv;

  bool operator==(const TrialPair&) const = default;
};

// Cross product ordered same-extract first, then by |key.offset - iv.offset|,
// then by input positions. Throws NoCandidates if either list is empty.
std::vector<TrialPair> pair_candidates(const std::vector<CandidateKey>& keys,
                                       const std::vector<CandidateIv>& ivs);

}  // namespace tlsmem

#endif  // TLSMEM_SCAN_HPP
