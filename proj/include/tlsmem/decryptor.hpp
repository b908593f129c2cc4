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

#ifndef TLSMEM_DECRYPTOR_HPP
#define TLSMEM_DECRYPTOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "tlsmem/bytes.hpp"
#include "tlsmem/capture.hpp"
#include "tlsmem/scan.hpp"

namespace tlsmem {

enum class Validation { Failed, TagVerified, TagAndProtocolValid };

std::string_view validation_name(Validation v);

// How a key block was read during trials: as scanned, or with the client
// and server halves exchanged.
enum class BlockOrientation { AsScanned, Swapped };

struct KeyMaterial {
  Bytes key;
  ImplicitIv iv{};

  bool operator==(const KeyMaterial&) const = default;
};

struct TrialResult {
  Bytes key;
  ImplicitIv implicit_iv{};
  Direction direction = Direction::ClientToServer;
  std::uint64_t seq_used = 0;
  std::size_t record_index = 0;  // into SessionCapture::records
  Bytes plaintext;
  Validation validation = Validation::Failed;
  std::size_t candidate_index = 0;  // winning pair or block
  std::optional<BlockOrientation> orientation;

  // Difference between the sequence number that verified and the one
  // reconstructed from the capture.
  std::int64_t seq_offset(const SessionCapture& capture) const;

  bool operator==(const TrialResult&) const = default;
};

struct TrialOutcome {
  std::optional<TrialResult> result;  // nullopt: no valid decrypt
  std::size_t trials = 0;             // AEAD open attempts up to and including the winner
  double elapsed_secs = 0.0;

  bool validated() const { return result.has_value(); }
};

using PlaintextValidator = std::function<bool(ByteView)>;

// Starts with an HTTP method token and a space, or with "HTTP/1.".
bool looks_like_http(ByteView plaintext);

// True when any validator accepts; the default set is {looks_like_http}.
bool validate_plaintext(ByteView plaintext);
bool validate_plaintext(ByteView plaintext, const std::vector<PlaintextValidator>& validators);

// Raw AES-GCM open of ciphertext||tag with a 12-byte nonce. Returns nullopt
// when the tag does not verify. Throws BadKeyLength.
std::optional<Bytes> gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed);

// TLS 1.2 AES-GCM open: nonce = implicit_iv || explicit_nonce, additional
// data = seq || type || version || plaintext length. Returns nullopt when the
// tag does not verify. Throws BadKeyLength.
std::optional<Bytes> decrypt_record(const EncryptedRecord& record, ByteView key, const ImplicitIv& implicit_iv,
                                    std::uint64_t seq);

// The 2*window+1 sequence numbers nearest to `reconstructed`, nearest first,
// lower before higher on ties; values below zero are replaced by the next
// ones above the window.
std::vector<std::uint64_t> seq_candidates(std::uint64_t reconstructed, std::size_t window);

struct TrialOptions {
  std::size_t seq_window = 2;
  unsigned jobs = 1;
  std::vector<PlaintextValidator> validators{looks_like_http};
};

// Tries each pair in order against the first ApplicationData record of
// `direction`; the lowest-index pair that verifies wins.
TrialOutcome trial_decrypt(const SessionCapture& capture, const std::vector<TrialPair>& pairs,
                           const TrialOptions& options = {},
                           Direction direction = Direction::ClientToServer);

// Each block contributes its client half, then (Swapped) its server half,
// as the client-direction key material.
TrialOutcome trial_decrypt_blocks(const SessionCapture& capture, const std::vector<CandidateKeyBlock>& blocks,
                                  const TrialOptions& options = {});

// Client/server halves of `block` under `orientation`.
std::pair<KeyMaterial, KeyMaterial> block_material(const CandidateKeyBlock& block, BlockOrientation orientation);

struct TranscriptEntry {
  Direction direction = Direction::ClientToServer;
  std::uint64_t seq = 0;
  std::size_t record_index = 0;
  std::optional<Bytes> plaintext;  // nullopt: failed or key unknown

  bool operator==(const TranscriptEntry&) const = default;
};

struct DecryptedSession {
  std::optional<KeyMaterial> client;
  std::optional<KeyMaterial> server;
  std::vector<TranscriptEntry> transcript;  // ApplicationData records, capture order
  bool partial = false;

  bool operator==(const DecryptedSession&) const = default;
};

// Decrypts every ApplicationData record with the given material. Sequence
// offsets shift each direction's reconstructed numbers.
DecryptedSession decrypt_session(const SessionCapture& capture, const std::optional<KeyMaterial>& client,
                                 const std::optional<KeyMaterial>& server, std::int64_t client_seq_offset = 0,
                                 std::int64_t server_seq_offset = 0);

// Key-block context: the server half comes from the winning block.
DecryptedSession decrypt_session(const SessionCapture& capture, const TrialResult& result,
                                 const std::vector<CandidateKeyBlock>& blocks);

// Pair context: server material is found by re-running the trial loop over
// `pairs` against the first server ApplicationData record.
DecryptedSession decrypt_session(const SessionCapture& capture, const TrialResult& result,
                                 const std::vector<TrialPair>& pairs, const TrialOptions& options = {});

}  // namespace tlsmem

#endif  // TLSMEM_DECRYPTOR_HPP
