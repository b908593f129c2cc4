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

#ifndef TLSMEM_FIXTURES_HPP
#define TLSMEM_FIXTURES_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlsmem/bytes.hpp"
#include "tlsmem/capture.hpp"
#include "tlsmem/decryptor.hpp"
#include "tlsmem/extracts.hpp"
#include "tlsmem/scan.hpp"

// Synthetic memory extracts with planted TLS artefacts plus the matching
// encrypted session. This is the ground-truth oracle for every other module.
namespace tlsmem::fixtures {

enum class Layout { WindowsMarkers, GenericKeyBlock, Both };
enum class Filler { Zero, LowEntropyText, Random };

struct FixtureSpec {
  std::size_t key_len_bytes = 32;
  // Empty plaintexts are replaced by seeded HTTP request/response text.
  std::string plaintext_client;
  std::string plaintext_server;
  Layout layout = Layout::WindowsMarkers;
  std::size_t iv_offset_after_3lls = 20;
  std::size_t key_offset_after_kssm = 28;
  std::vector<std::size_t> extract_sizes{256 * 1024, 2 * kMiB, 3 * kMiB + 512 * 1024, 8 * kMiB + 256 * 1024};
  // Extract receiving the planted artefacts; default is the first Band1 one.
  std::optional<std::size_t> target_extract;
  std::size_t decoy_markers = 3;
  std::size_t decoy_high_entropy_regions = 4;
  // Copies of (key-like bytes, random salt, counter nonce 1) packed 96 bytes
  // apart, as left behind by counter-style nonce buffers.
  std::size_t counter_decoys = 0;
  Filler filler = Filler::LowEntropyText;
  NonceStyle explicit_nonce_style = NonceStyle::CounterLike;
  // Which implicit IV precedes the explicit nonce in the planted nonce buffer.
  BlockHypothesis nonce_buffer_iv = BlockHypothesis::IvWasClient;
  // Windows layout: plant the server-direction IV/key structures as well.
  bool plant_server_material = true;
  std::uint64_t rng_seed = 1;

  // Throws SpecInvalid with a reason.
  void validate() const;
};

struct PlantedArtefact {
  std::string what;  // client_iv, client_key, server_iv, server_key, key_block, nonce_buffer
  std::size_t extract_id = 0;
  std::size_t offset = 0;
  Bytes value;
};

struct FixtureGroundTruth {
  std::uint16_t cipher_suite = 0;
  KeyMaterial client;
  KeyMaterial server;
  std::vector<PlantedArtefact> planted;
  Bytes plaintext_client;
  Bytes plaintext_server;
  ExplicitNonce first_client_nonce{};

  const PlantedArtefact* find(std::string_view what) const;
};

struct Fixture {
  FixtureSpec spec;
  std::vector<MemoryExtract> extracts;  // ids match positions; names extract_NNN.bin
  std::map<std::string, std::uint64_t> base_addresses;
  Bytes client_stream;  // client.tls
  Bytes server_stream;  // server.tls
  FixtureGroundTruth truth;

  ExtractSet extract_set() const;
  SessionCapture capture() const;
};

struct FixturePaths {
  std::string root;
  std::string extracts_dir;
  std::string capture_dir;
  std::string groundtruth;
};

// In-memory fixture, deterministic under spec.rng_seed. Verifies that every
// planted artefact reads back at its recorded location.
Fixture build_fixture(const FixtureSpec& spec);

// Writes extracts/ (+manifest.json), capture/{client,server}.tls,
// groundtruth.json and spec.json under `out_dir`, then re-reads the
// extracts to check the planted bytes.
FixturePaths write_fixture(const Fixture& fixture, const std::string& out_dir);

FixturePaths generate_fixture(const FixtureSpec& spec, const std::string& out_dir);

// Independent TLS 1.2 AES-GCM seal used to fabricate records.
EncryptedRecord reference_encrypt(ByteView plaintext, ByteView key, const ImplicitIv& implicit_iv,
                                  const ExplicitNonce& explicit_nonce, std::uint64_t seq, ContentType content_type,
                                  std::uint16_t version, Direction direction = Direction::ClientToServer);

std::uint16_t cipher_suite_for(std::size_t key_len_bytes);

FixtureSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const FixtureSpec& spec);
nlohmann::json ground_truth_to_json(const Fixture& fixture);

}  // namespace tlsmem::fixtures

#endif  // TLSMEM_FIXTURES_HPP
