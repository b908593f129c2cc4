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

#include "tlsmem/decryptor.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <memory>
#include <mutex>
#include <string_view>

#include "tlsmem/error.hpp"
#include "tlsmem/parallel.hpp"

namespace tlsmem {

namespace {

class GcmOpener {
 public:
  GcmOpener() : ctx_(EVP_CIPHER_CTX_new()) {
    if (!ctx_) throw std::bad_alloc();
  }

  std::optional<Bytes> open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed) {
    const EVP_CIPHER* cipher = key.size() == 16 ? EVP_aes_128_gcm() : EVP_aes_256_gcm();
    EVP_CIPHER_CTX* c = ctx_.get();
    const std::size_t pt_len = sealed.size() - kGcmTagLen;
    Bytes out(pt_len);
    int len = 0;
    if (EVP_DecryptInit_ex(c, cipher, nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(c, EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
        EVP_DecryptInit_ex(c, nullptr, nullptr, key.data(), nonce.data()) != 1 ||
        EVP_DecryptUpdate(c, nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
      return std::nullopt;
    if (pt_len > 0 &&
        EVP_DecryptUpdate(c, out.data(), &len, sealed.data(), static_cast<int>(pt_len)) != 1)
      return std::nullopt;
    Bytes tag(sealed.end() - kGcmTagLen, sealed.end());
    if (EVP_CIPHER_CTX_ctrl(c, EVP_CTRL_GCM_SET_TAG, kGcmTagLen, tag.data()) != 1) return std::nullopt;
    std::uint8_t final_block[16];
    if (EVP_DecryptFinal_ex(c, final_block, &len) != 1) return std::nullopt;
    return out;
  }

 private:
  struct Free {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
  };
  std::unique_ptr<EVP_CIPHER_CTX, Free> ctx_;
};

void check_key(ByteView key) {
  if (key.size() != 16 && key.size() != 32)
    throw Error(Errc::BadKeyLength, "AES-GCM key must be 16 or 32 bytes, got " + std::to_string(key.size()));
}

std::optional<Bytes> open_record(GcmOpener& opener, const EncryptedRecord& record, ByteView key,
                                 const ImplicitIv& iv, std::uint64_t seq) {
  std::array<std::uint8_t, 12> nonce;
  std::copy(iv.begin(), iv.end(), nonce.begin());
  std::copy(record.explicit_nonce.begin(), record.explicit_nonce.end(), nonce.begin() + 4);
  const std::size_t pt_len = record.ciphertext.size() - kGcmTagLen;
  std::array<std::uint8_t, 13> aad;
  const auto seq_bytes = be64_array(seq);
  std::copy(seq_bytes.begin(), seq_bytes.end(), aad.begin());
  aad[8] = static_cast<std::uint8_t>(record.content_type);
  aad[9] = static_cast<std::uint8_t>(record.record_version >> 8);
  aad[10] = static_cast<std::uint8_t>(record.record_version);
  aad[11] = static_cast<std::uint8_t>(pt_len >> 8);
  aad[12] = static_cast<std::uint8_t>(pt_len);
  return opener.open(key, nonce, aad, record.ciphertext);
}

struct Candidate {
  const Bytes* key;
  ImplicitIv iv;
};

struct RunResult {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  std::size_t seq_position = 0;
  std::uint64_t seq = 0;
  Bytes plaintext;
};

// Lowest candidate index that opens `record` wins, regardless of which
// worker finds it.
std::optional<RunResult> run_trials(const EncryptedRecord& record, const std::vector<Candidate>& candidates,
                                    const std::vector<std::uint64_t>& seqs, unsigned jobs) {
  std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};
  std::mutex mutex;
  RunResult winner;
  const unsigned workers = std::max(1u, jobs);
  std::vector<GcmOpener> openers(workers);
  std::atomic<unsigned> next_opener{0};
  std::atomic<std::size_t> next{0};
  parallel_for(workers, workers, [&](std::size_t) {
    GcmOpener& opener = openers[next_opener++];
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      if (i > best.load()) break;
      const Candidate& c = candidates[i];
      for (std::size_t j = 0; j < seqs.size(); ++j) {
        auto pt = open_record(opener, record, *c.key, c.iv, seqs[j]);
        if (!pt) continue;
        std::lock_guard lock(mutex);
        if (i < winner.index) {
          winner = {i, j, seqs[j], std::move(*pt)};
          best = i;
        }
        break;
      }
    }
  });
  if (winner.index == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return winner;
}

TrialOutcome run_direction(const SessionCapture& capture, Direction direction, const std::vector<Candidate>& candidates,
                           const TrialOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto target = capture.first_app_data(direction);
  if (!target)
    throw Error(Errc::NoApplicationData,
                std::string("no ApplicationData record in direction ") + std::string(direction_name(direction)));
  for (const auto& c : candidates) check_key(*c.key);
  const EncryptedRecord& record = capture.records[*target];
  const auto seqs = seq_candidates(record.seq, options.seq_window);

  TrialOutcome outcome;
  auto won = run_trials(record, candidates, seqs, options.jobs);
  if (won) {
    outcome.trials = won->index * seqs.size() + won->seq_position + 1;
    TrialResult r;
    r.key = *candidates[won->index].key;
    r.implicit_iv = candidates[won->index].iv;
    r.direction = direction;
    r.seq_used = won->seq;
    r.record_index = *target;
    r.plaintext = std::move(won->plaintext);
    r.validation = validate_plaintext(r.plaintext, options.validators) ? Validation::TagAndProtocolValid
                                                                       : Validation::TagVerified;
    r.candidate_index = won->index;
    outcome.result = std::move(r);
  } else {
    outcome.trials = candidates.size() * seqs.size();
  }
  outcome.elapsed_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

constexpr std::string_view kHttpMethods[] = {"GET", "POST", "HEAD", "PUT", "DELETE",
                                             "OPTIONS", "TRACE", "CONNECT", "PATCH"};

std::uint64_t shifted(std::uint64_t seq, std::int64_t offset) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(seq) + offset);
}

}  // namespace

std::string_view validation_name(Validation v) {
  switch (v) {
    case Validation::Failed: return "Failed";
    case Validation::TagVerified: return "TagVerified";
    case Validation::TagAndProtocolValid: return "TagAndProtocolValid";
  }
  return "Failed";
}

std::int64_t TrialResult::seq_offset(const SessionCapture& capture) const {
  return static_cast<std::int64_t>(seq_used) - static_cast<std::int64_t>(capture.records.at(record_index).seq);
}

bool looks_like_http(ByteView plaintext) {
  std::string_view text(reinterpret_cast<const char*>(plaintext.data()), plaintext.size());
  if (text.starts_with("HTTP/1.")) return true;
  for (auto method : kHttpMethods)
    if (text.size() > method.size() && text.starts_with(method) && text[method.size()] == ' ') return true;
  return false;
}

bool validate_plaintext(ByteView plaintext) { return looks_like_http(plaintext); }

bool validate_plaintext(ByteView plaintext, const std::vector<PlaintextValidator>& validators) {
  return std::any_of(validators.begin(), validators.end(), [&](const auto& v) { return v && v(plaintext); });
}

std::optional<Bytes> gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed) {
  check_key(key);
  if (nonce.size() != 12) throw Error(Errc::InvalidArgument, "GCM nonce must be 12 bytes");
  if (sealed.size() < kGcmTagLen) throw Error(Errc::MalformedRecord, "ciphertext shorter than tag");
  GcmOpener opener;
  return opener.open(key, nonce, aad, sealed);
}

std::optional<Bytes> decrypt_record(const EncryptedRecord& record, ByteView key, const ImplicitIv& implicit_iv,
                                    std::uint64_t seq) {
  check_key(key);
  if (record.ciphertext.size() < kGcmTagLen) throw Error(Errc::MalformedRecord, "ciphertext shorter than tag");
  GcmOpener opener;
  return open_record(opener, record, key, implicit_iv, seq);
}

std::vector<std::uint64_t> seq_candidates(std::uint64_t reconstructed, std::size_t window) {
  std::vector<std::uint64_t> out{reconstructed};
  const std::size_t want = 2 * window + 1;
  for (std::uint64_t d = 1; out.size() < want; ++d) {
    if (d <= reconstructed) out.push_back(reconstructed - d);
    if (out.size() < want && reconstructed <= std::numeric_limits<std::uint64_t>::max() - d)
      out.push_back(reconstructed + d);
  }
  return out;
}

TrialOutcome trial_decrypt(const SessionCapture& capture, const std::vector<TrialPair>& pairs,
                           const TrialOptions& options, Direction direction) {
  std::vector<Candidate> candidates;
  candidates.reserve(pairs.size());
  for (const auto& p : pairs) candidates.push_back({&p.key.value, p.iv.value});
  return run_direction(capture, direction, candidates, options);
}

std::pair<KeyMaterial, KeyMaterial> block_material(const CandidateKeyBlock& block, BlockOrientation orientation) {
  KeyMaterial client{block.client_key, block.client_iv};
  KeyMaterial server{block.server_key, block.server_iv};
  if (orientation == BlockOrientation::Swapped) std::swap(client, server);
  return {std::move(client), std::move(server)};
}

TrialOutcome trial_decrypt_blocks(const SessionCapture& capture, const std::vector<CandidateKeyBlock>& blocks,
                                  const TrialOptions& options) {
  std::vector<Candidate> candidates;
  candidates.reserve(2 * blocks.size());
  for (const auto& b : blocks) {
    candidates.push_back({&b.client_key, b.client_iv});
    candidates.push_back({&b.server_key, b.server_iv});
  }
  TrialOutcome outcome = run_direction(capture, Direction::ClientToServer, candidates, options);
  if (outcome.result) {
    const std::size_t c = outcome.result->candidate_index;
    outcome.result->candidate_index = c / 2;
    outcome.result->orientation = c % 2 == 0 ? BlockOrientation::AsScanned : BlockOrientation::Swapped;
  }
  return outcome;
}

DecryptedSession decrypt_session(const SessionCapture& capture, const std::optional<KeyMaterial>& client,
                                 const std::optional<KeyMaterial>& server, std::int64_t client_seq_offset,
                                 std::int64_t server_seq_offset) {
  if (client) check_key(client->key);
  if (server) check_key(server->key);
  DecryptedSession session;
  session.client = client;
  session.server = server;
  GcmOpener opener;
  for (std::size_t i = 0; i < capture.records.size(); ++i) {
    const auto& rec = capture.records[i];
    if (rec.content_type != ContentType::ApplicationData) continue;
    const bool is_client = rec.direction == Direction::ClientToServer;
    const auto& material = is_client ? client : server;
    TranscriptEntry entry;
    entry.direction = rec.direction;
    entry.seq = shifted(rec.seq, is_client ? client_seq_offset : server_seq_offset);
    entry.record_index = i;
    if (material) entry.plaintext = open_record(opener, rec, material->key, material->iv, entry.seq);
    session.partial = session.partial || !entry.plaintext;
    session.transcript.push_back(std::move(entry));
  }
  return session;
}

DecryptedSession decrypt_session(const SessionCapture& capture, const TrialResult& result,
                                 const std::vector<CandidateKeyBlock>& blocks) {
  if (result.validation == Validation::Failed) throw Error(Errc::InvalidArgument, "trial result did not validate");
  const auto& block = blocks.at(result.candidate_index);
  auto [client, server] = block_material(block, result.orientation.value_or(BlockOrientation::AsScanned));
  const std::int64_t offset = result.seq_offset(capture);
  return decrypt_session(capture, client, server, offset, offset);
}

DecryptedSession decrypt_session(const SessionCapture& capture, const TrialResult& result,
                                 const std::vector<TrialPair>& pairs, const TrialOptions& options) {
  if (result.validation == Validation::Failed) throw Error(Errc::InvalidArgument, "trial result did not validate");
  const KeyMaterial client{result.key, result.implicit_iv};
  const std::int64_t client_offset = result.seq_offset(capture);
  std::optional<KeyMaterial> server;
  std::int64_t server_offset = client_offset;
  if (capture.first_app_data(Direction::ServerToClient) && !pairs.empty()) {
    auto outcome = trial_decrypt(capture, pairs, options, Direction::ServerToClient);
    if (outcome.result) {
      server = KeyMaterial{outcome.result->key, outcome.result->implicit_iv};
      server_offset = outcome.result->seq_offset(capture);
    }
  }
  return decrypt_session(capture, client, server, client_offset, server_offset);
}

}  // namespace tlsmem
