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

#include "tlsmem/fixtures.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <random>

#include "tlsmem/error.hpp"
#include "tlsmem/ref_gcm.hpp"

namespace tlsmem::fixtures {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bytes come straight from the engine so output is identical across
// standard libraries (distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }

  void fill(std::uint8_t* p, std::size_t n) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 8 == 0) word = next();
      p[i] = static_cast<std::uint8_t>(word >> (8 * (i % 8)));
    }
  }
  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out;
    fill(out.data(), N);
    return out;
  }
  std::string word(std::string_view alphabet, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[below(alphabet.size())]);
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

// Twelve symbols in total (ten letters, space, underscore), so no window of
// this text exceeds log2(12) ~ 3.58 bits per byte.
constexpr std::string_view kVocabulary[] = {
    "alert",    "stencil",  "ratio",       "scenario",  "rotation",  "listener", "console", "section",
    "trace",    "notes",    "coral",       "social",    "lantern",   "recital",  "creation", "tortilla",
    "cilantro", "entries",  "local_store", "elections", "oscillator", "reactions", "central", "select_all",
};

void fill_background(Bytes& data, Filler filler, Rng& rng) {
  switch (filler) {
    case Filler::Zero:
      break;
    case Filler::Random:
      rng.fill(data.data(), data.size());
      break;
    case Filler::LowEntropyText: {
      std::size_t pos = 0;
      while (pos < data.size()) {
        const auto word = kVocabulary[rng.below(std::size(kVocabulary))];
        const std::size_t n = std::min(word.size(), data.size() - pos);
        std::memcpy(data.data() + pos, word.data(), n);
        pos += n;
        if (pos < data.size()) data[pos++] = ' ';
      }
      break;
    }
  }
}

constexpr std::size_t kPlacementMargin = 64;
constexpr std::size_t kPlacementAlign = 16;
constexpr std::size_t kStructKeyMarkerAt = 128;  // KSSM follows 3LLS by this many bytes
constexpr std::size_t kCounterDecoyStride = 96;
constexpr std::size_t kCounterDecoysPerRun = 64;
constexpr std::uint64_t kBaseAddress = 0x00007ff600000000ULL;

class Allocator {
 public:
  explicit Allocator(const std::vector<MemoryExtract>& extracts) : sizes_(extracts.size()), used_(extracts.size()) {
    for (std::size_t i = 0; i < extracts.size(); ++i) sizes_[i] = extracts[i].size_bytes();
  }

  // Aligned offset for `len` bytes in extract `id`, clear of earlier
  // placements by kPlacementMargin.
  std::optional<std::size_t> place(std::size_t id, std::size_t len, Rng& rng) {
    const std::size_t size = sizes_[id];
    if (len + 2 * kPlacementMargin > size) return std::nullopt;
    const std::size_t slots = (size - len - 2 * kPlacementMargin) / kPlacementAlign + 1;
    for (int attempt = 0; attempt < 4096; ++attempt) {
      const std::size_t off = kPlacementMargin + rng.below(slots) * kPlacementAlign;
      const bool clash = std::any_of(used_[id].begin(), used_[id].end(), [&](const auto& u) {
        return off < u.second + kPlacementMargin && u.first < off + len + kPlacementMargin;
      });
      if (clash) continue;
      used_[id].emplace_back(off, off + len);
      return off;
    }
    return std::nullopt;
  }

  std::size_t must_place(std::size_t id, std::size_t len, Rng& rng, const char* what) {
    auto off = place(id, len, rng);
    if (!off) throw Error(Errc::SpecInvalid, std::string("no room for ") + what + " in extract " + std::to_string(id));
    return *off;
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> used_;
};

void put(Bytes& data, std::size_t offset, ByteView value) {
  std::copy(value.begin(), value.end(), data.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::string extract_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "extract_%03zu.bin", id);
  return buf;
}

Bytes wire_record(ContentType type, ByteView payload) {
  Bytes out{static_cast<std::uint8_t>(type), 0x03, 0x03};
  append_be16(out, static_cast<std::uint16_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes handshake_message(std::uint8_t type, ByteView body) {
  Bytes out{type, static_cast<std::uint8_t>(body.size() >> 16), static_cast<std::uint8_t>(body.size() >> 8),
            static_cast<std::uint8_t>(body.size())};
  for (std::uint8_t b : body) out.push_back(b);
  return out;
}

void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

std::string default_request(Rng& rng) {
  constexpr std::string_view kPath = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_";
  constexpr std::string_view kHost = "abcdefghijklmnopqrstuvwxyz";
  std::string path;
  const std::size_t segments = 3 + rng.below(5);
  for (std::size_t i = 0; i < segments; ++i) path += "/" + rng.word(kPath, 6 + rng.below(14));
  return "GET /images" + path + ".jpeg HTTP/1.1\r\n" +
         "User-Agent: Mozilla/4.0 (compatible; MSIE 8.0; Windows NT 10.0; Win64; x64)\r\n" +
         "Host: " + rng.word(kHost, 10 + rng.below(16)) + ".net\r\n" +
         "Connection: Keep-Alive\r\nCache-Control: no-cache\r\n\r\n";
}

std::string default_response(Rng& rng) {
  const std::string body = "<html><body>" + rng.word("0123456789abcdef", 32) + "</body></html>";
  return "HTTP/1.1 200 OK\r\nContent-Type: text/html\r\nContent-Length: " + std::to_string(body.size()) +
         "\r\nConnection: Keep-Alive\r\n\r\n" + body;
}

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Layout> kLayoutNames[] = {
    {Layout::WindowsMarkers, "WindowsMarkers"}, {Layout::GenericKeyBlock, "GenericKeyBlock"}, {Layout::Both, "Both"}};
constexpr EnumName<Filler> kFillerNames[] = {
    {Filler::Zero, "Zero"}, {Filler::LowEntropyText, "LowEntropyText"}, {Filler::Random, "Random"}};
constexpr EnumName<NonceStyle> kNonceNames[] = {{NonceStyle::CounterLike, "CounterLike"},
                                                {NonceStyle::RandomLike, "RandomLike"}};
constexpr EnumName<BlockHypothesis> kHypothesisNames[] = {{BlockHypothesis::IvWasClient, "IvWasClient"},
                                                          {BlockHypothesis::IvWasServer, "IvWasServer"}};

template <typename E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "";
}

template <typename E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const json& j, const char* field) {
  const auto text = j.get<std::string>();
  for (const auto& e : table)
    if (text == e.name) return e.value;
  throw Error(Errc::SpecInvalid, std::string("unknown value '") + text + "' for " + field);
}

}  // namespace

std::uint16_t cipher_suite_for(std::size_t key_len_bytes) {
  return key_len_bytes == 16 ? 0xC02F : 0xC030;  // ECDHE_RSA_WITH_AES_{128,256}_GCM
}

void FixtureSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::SpecInvalid, why); };
  if (key_len_bytes != 16 && key_len_bytes != 32) fail("key_len_bytes must be 16 or 32");
  if (extract_sizes.empty()) fail("extract_sizes is empty");
  if (std::none_of(extract_sizes.begin(), extract_sizes.end(),
                   [](std::size_t s) { return band_for_size(s) == Band::Band1; }))
    fail("at least one extract must fall in Band1 (1 MiB <= size < 8 MiB)");
  for (std::size_t s : extract_sizes)
    if (s == 0) fail("extract sizes must be > 0");
  const ScanConfig defaults;
  if (iv_offset_after_3lls >= defaults.max_iv_distance) fail("iv_offset_after_3lls must be < max_iv_distance");
  if (key_offset_after_kssm >= defaults.max_key_distance) fail("key_offset_after_kssm must be < max_key_distance");
  if (target_extract && *target_extract >= extract_sizes.size()) fail("target_extract out of range");
  if (plaintext_client.size() > (1u << 14) || plaintext_server.size() > (1u << 14))
    fail("plaintexts must fit one record");
}

const PlantedArtefact* FixtureGroundTruth::find(std::string_view what) const {
  for (const auto& p : planted)
    if (p.what == what) return &p;
  return nullptr;
}

ExtractSet Fixture::extract_set() const {
  ExtractSet set(extracts);
  set.base_addresses = base_addresses;
  return set;
}

SessionCapture Fixture::capture() const { return parse_raw_records(client_stream, server_stream); }

EncryptedRecord reference_encrypt(ByteView plaintext, ByteView key, const ImplicitIv& implicit_iv,
                                  const ExplicitNonce& explicit_nonce, std::uint64_t seq, ContentType content_type,
                                  std::uint16_t version, Direction direction) {
  if (key.size() != 16 && key.size() != 32) throw Error(Errc::BadKeyLength, "reference_encrypt key length");
  if (plaintext.size() > 0xffff) throw Error(Errc::InvalidArgument, "plaintext too long for one record");
  Bytes nonce(implicit_iv.begin(), implicit_iv.end());
  append(nonce, explicit_nonce);
  Bytes aad;
  append_be64(aad, seq);
  aad.push_back(static_cast<std::uint8_t>(content_type));
  append_be16(aad, version);
  append_be16(aad, static_cast<std::uint16_t>(plaintext.size()));

  EncryptedRecord rec;
  rec.direction = direction;
  rec.seq = seq;
  rec.explicit_nonce = explicit_nonce;
  rec.ciphertext = ref::aes_gcm_seal(key, nonce, aad, plaintext);
  rec.record_version = version;
  rec.content_type = content_type;
  return rec;
}

Fixture build_fixture(const FixtureSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed);
  const std::size_t k = spec.key_len_bytes;

  Fixture fx;
  fx.spec = spec;
  auto& truth = fx.truth;
  truth.cipher_suite = cipher_suite_for(k);
  truth.client = {rng.bytes(k), rng.array<4>()};
  truth.server = {rng.bytes(k), rng.array<4>()};
  const std::string req = spec.plaintext_client.empty() ? default_request(rng) : spec.plaintext_client;
  const std::string resp = spec.plaintext_server.empty() ? default_response(rng) : spec.plaintext_server;
  truth.plaintext_client.assign(req.begin(), req.end());
  truth.plaintext_server.assign(resp.begin(), resp.end());

  // Explicit nonces: counter style uses the record sequence number.
  auto nonce_for = [&](std::uint64_t seq, bool first_client_app) {
    if (spec.explicit_nonce_style == NonceStyle::CounterLike) return be64_array(seq);
    ExplicitNonce n = rng.array<8>();
    while (first_client_app && load_be64(n.data()) < kDefaultCounterNonceBound) n = rng.array<8>();
    return n;
  };
  const ExplicitNonce client_fin_nonce = nonce_for(0, false);
  const ExplicitNonce client_app_nonce = nonce_for(1, true);
  const ExplicitNonce server_fin_nonce = nonce_for(0, false);
  const ExplicitNonce server_app_nonce = nonce_for(1, false);
  truth.first_client_nonce = client_app_nonce;

  // Background extracts.
  std::uint64_t base = kBaseAddress;
  for (std::size_t i = 0; i < spec.extract_sizes.size(); ++i) {
    MemoryExtract ex;
    ex.id = i;
    ex.name = extract_name(i);
    ex.data.assign(spec.extract_sizes[i], 0);
    fill_background(ex.data, spec.filler, rng);
    ex.band = band_for_size(ex.size_bytes());
    fx.base_addresses[ex.name] = base;
    base += (ex.size_bytes() + 0xffff) & ~std::uint64_t{0xffff};
    fx.extracts.push_back(std::move(ex));
  }
  std::size_t target = 0;
  if (spec.target_extract) {
    target = *spec.target_extract;
  } else {
    while (band_for_size(spec.extract_sizes[target]) != Band::Band1) ++target;
  }

  Allocator alloc(fx.extracts);
  auto plant = [&](std::string what, std::size_t id, std::size_t offset, ByteView value) {
    put(fx.extracts[id].data, offset, value);
    truth.planted.push_back({std::move(what), id, offset, Bytes(value.begin(), value.end())});
  };
  const std::size_t struct_len = kStructKeyMarkerAt + 4 + ScanConfig{}.max_key_distance + k;
  // '3LLS' + IV, then 'KSSM' + key, as one placement. The rest of the
  // structure is zeros and a few small integer fields, not filler.
  auto plant_marker_struct = [&](std::size_t id, const ImplicitIv& iv, const Bytes* key, const char* iv_name,
                                 const char* key_name) {
    const std::size_t s = alloc.must_place(id, struct_len, rng, "marker structure");
    Bytes& data = fx.extracts[id].data;
    std::fill_n(data.begin() + static_cast<std::ptrdiff_t>(s), struct_len, std::uint8_t{0});
    put(data, s, kSsl3Marker);
    data[s + 4] = 1;  // version-like field
    // Pointer fields into the same region, skipping the IV slot.
    const std::size_t iv_rel = 4 + spec.iv_offset_after_3lls;
    for (std::size_t slot = 8; slot + 8 <= kStructKeyMarkerAt; slot += 8) {
      if (slot < iv_rel + kImplicitIvLen && iv_rel < slot + 8) continue;
      if (rng.below(4) == 0) continue;
      const std::uint64_t ptr = fx.base_addresses.at(fx.extracts[id].name) + (rng.below(data.size()) & ~std::size_t{7});
      for (int b = 0; b < 8; ++b) data[s + slot + b] = static_cast<std::uint8_t>(ptr >> (8 * b));
    }
    put(data, s + kStructKeyMarkerAt, kMssKMarker);
    data[s + kStructKeyMarkerAt + 4] = 1;
    data[s + kStructKeyMarkerAt + 8] = static_cast<std::uint8_t>(k * 8);  // key bits, little-endian
    data[s + kStructKeyMarkerAt + 9] = static_cast<std::uint8_t>((k * 8) >> 8);
    const std::size_t iv_at = s + 4 + spec.iv_offset_after_3lls;
    if (iv_name)
      plant(iv_name, id, iv_at, iv);
    else
      put(fx.extracts[id].data, iv_at, iv);
    if (key) plant(key_name, id, s + kStructKeyMarkerAt + 4 + spec.key_offset_after_kssm, *key);
  };

  if (spec.layout != Layout::GenericKeyBlock) {
    plant_marker_struct(target, truth.client.iv, &truth.client.key, "client_iv", "client_key");
    if (spec.plant_server_material)
      plant_marker_struct(target, truth.server.iv, &truth.server.key, "server_iv", "server_key");
  }
  if (spec.layout != Layout::WindowsMarkers) {
    Bytes block = truth.client.key;
    append(block, truth.server.key);
    append(block, truth.client.iv);
    append(block, truth.server.iv);
    plant("key_block", target, alloc.must_place(target, block.size(), rng, "key block"), block);
    const auto& salt = spec.nonce_buffer_iv == BlockHypothesis::IvWasClient ? truth.client.iv : truth.server.iv;
    Bytes buffer(salt.begin(), salt.end());
    append(buffer, client_app_nonce);
    plant("nonce_buffer", target, alloc.must_place(target, buffer.size(), rng, "nonce buffer"), buffer);
  }

  const std::size_t n_extracts = fx.extracts.size();
  for (std::size_t i = 0; i < spec.decoy_markers; ++i)
    plant_marker_struct(rng.below(n_extracts), rng.array<4>(), nullptr, nullptr, nullptr);
  for (std::size_t i = 0; i < spec.decoy_high_entropy_regions; ++i) {
    const std::size_t id = rng.below(n_extracts);
    const Bytes blob = rng.bytes(256 + rng.below(3841));
    put(fx.extracts[id].data, alloc.must_place(id, blob.size(), rng, "high-entropy decoy"), blob);
  }
  for (std::size_t left = spec.counter_decoys; left > 0;) {
    const std::size_t run = std::min(left, kCounterDecoysPerRun);
    const std::size_t id = rng.below(n_extracts);
    const std::size_t at = alloc.must_place(id, run * kCounterDecoyStride, rng, "counter decoys");
    for (std::size_t j = 0; j < run; ++j) {
      Bytes entry = rng.bytes(2 * k + 4);
      append(entry, be64_array(1));
      put(fx.extracts[id].data, at + j * kCounterDecoyStride, entry);
    }
    left -= run;
  }

  for (const auto& p : truth.planted) {
    const auto& data = fx.extracts[p.extract_id].data;
    if (!std::equal(p.value.begin(), p.value.end(), data.begin() + static_cast<std::ptrdiff_t>(p.offset)))
      throw std::logic_error("fixture self-check failed for " + p.what);
  }

  // Minimal handshake: ClientHello / ServerHello+ServerHelloDone / CCS.
  const std::uint16_t suite = truth.cipher_suite;
  Bytes client_hello_body;
  append_be16(client_hello_body, kTls12);
  append(client_hello_body, rng.bytes(32));
  client_hello_body.push_back(0);
  append_be16(client_hello_body, 2);
  append_be16(client_hello_body, suite);
  client_hello_body.push_back(1);
  client_hello_body.push_back(0);
  Bytes server_hello_body;
  append_be16(server_hello_body, kTls12);
  append(server_hello_body, rng.bytes(32));
  server_hello_body.push_back(0);
  append_be16(server_hello_body, suite);
  server_hello_body.push_back(0);
  Bytes server_flight = handshake_message(2, server_hello_body);
  append(server_flight, handshake_message(14, {}));

  const Bytes ccs = wire_record(ContentType::ChangeCipherSpec, Bytes{1});
  auto sealed = [&](const EncryptedRecord& r) {
    Bytes payload(r.explicit_nonce.begin(), r.explicit_nonce.end());
    append(payload, r.ciphertext);
    return wire_record(r.content_type, payload);
  };
  auto finished = [&] {
    Bytes f{0x14, 0x00, 0x00, 0x0c};
    append(f, rng.bytes(12));
    return f;
  };

  fx.client_stream = wire_record(ContentType::Handshake, handshake_message(1, client_hello_body));
  append(fx.client_stream, ccs);
  append(fx.client_stream, sealed(reference_encrypt(finished(), truth.client.key, truth.client.iv, client_fin_nonce, 0,
                                                    ContentType::Handshake, kTls12)));
  append(fx.client_stream,
         sealed(reference_encrypt(truth.plaintext_client, truth.client.key, truth.client.iv, client_app_nonce, 1,
                                  ContentType::ApplicationData, kTls12)));

  fx.server_stream = wire_record(ContentType::Handshake, server_flight);
  append(fx.server_stream, ccs);
  append(fx.server_stream, sealed(reference_encrypt(finished(), truth.server.key, truth.server.iv, server_fin_nonce, 0,
                                                    ContentType::Handshake, kTls12, Direction::ServerToClient)));
  append(fx.server_stream,
         sealed(reference_encrypt(truth.plaintext_server, truth.server.key, truth.server.iv, server_app_nonce, 1,
                                  ContentType::ApplicationData, kTls12, Direction::ServerToClient)));
  return fx;
}

FixturePaths write_fixture(const Fixture& fx, const std::string& out_dir) {
  FixturePaths paths;
  paths.root = out_dir;
  paths.extracts_dir = (fs::path(out_dir) / "extracts").string();
  paths.capture_dir = (fs::path(out_dir) / "capture").string();
  paths.groundtruth = (fs::path(out_dir) / "groundtruth.json").string();
  fs::create_directories(paths.extracts_dir);
  fs::create_directories(paths.capture_dir);

  json manifest = json::object();
  for (const auto& ex : fx.extracts) {
    write_file((fs::path(paths.extracts_dir) / ex.name).string(), ex.data);
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(fx.base_addresses.at(ex.name)));
    manifest[ex.name] = buf;
  }
  const std::string manifest_text = manifest.dump(2) + "\n";
  write_file((fs::path(paths.extracts_dir) / kManifestName).string(), as_bytes(manifest_text));
  write_file((fs::path(paths.capture_dir) / "client.tls").string(), fx.client_stream);
  write_file((fs::path(paths.capture_dir) / "server.tls").string(), fx.server_stream);
  const std::string truth_text = ground_truth_to_json(fx).dump(2) + "\n";
  write_file(paths.groundtruth, as_bytes(truth_text));
  const std::string spec_text = spec_to_json(fx.spec).dump(2) + "\n";
  write_file((fs::path(out_dir) / "spec.json").string(), as_bytes(spec_text));

  for (const auto& p : fx.truth.planted) {
    const Bytes back = read_file((fs::path(paths.extracts_dir) / fx.extracts[p.extract_id].name).string());
    if (back.size() < p.offset + p.value.size() ||
        !std::equal(p.value.begin(), p.value.end(), back.begin() + static_cast<std::ptrdiff_t>(p.offset)))
      throw std::runtime_error("fixture re-read mismatch for " + p.what);
  }
  return paths;
}

FixturePaths generate_fixture(const FixtureSpec& spec, const std::string& out_dir) {
  return write_fixture(build_fixture(spec), out_dir);
}

FixtureSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::SpecInvalid, "fixture spec must be a JSON object");
  FixtureSpec s;
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "key_len_bytes") s.key_len_bytes = v.get<std::size_t>();
      else if (key == "plaintext_client") s.plaintext_client = v.get<std::string>();
      else if (key == "plaintext_server") s.plaintext_server = v.get<std::string>();
      else if (key == "layout") s.layout = parse_enum(kLayoutNames, v, "layout");
      else if (key == "iv_offset_after_3lls") s.iv_offset_after_3lls = v.get<std::size_t>();
      else if (key == "key_offset_after_kssm") s.key_offset_after_kssm = v.get<std::size_t>();
      else if (key == "extract_sizes") s.extract_sizes = v.get<std::vector<std::size_t>>();
      else if (key == "target_extract") s.target_extract = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
      else if (key == "decoy_markers") s.decoy_markers = v.get<std::size_t>();
      else if (key == "decoy_high_entropy_regions") s.decoy_high_entropy_regions = v.get<std::size_t>();
      else if (key == "counter_decoys") s.counter_decoys = v.get<std::size_t>();
      else if (key == "filler") s.filler = parse_enum(kFillerNames, v, "filler");
      else if (key == "explicit_nonce_style") s.explicit_nonce_style = parse_enum(kNonceNames, v, "explicit_nonce_style");
      else if (key == "nonce_buffer_iv") s.nonce_buffer_iv = parse_enum(kHypothesisNames, v, "nonce_buffer_iv");
      else if (key == "plant_server_material") s.plant_server_material = v.get<bool>();
      else if (key == "rng_seed") s.rng_seed = v.get<std::uint64_t>();
      else throw Error(Errc::SpecInvalid, "unknown field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SpecInvalid, e.what());
  }
  s.validate();
  return s;
}

json spec_to_json(const FixtureSpec& s) {
  json j;
  j["key_len_bytes"] = s.key_len_bytes;
  j["plaintext_client"] = s.plaintext_client;
  j["plaintext_server"] = s.plaintext_server;
  j["layout"] = name_of(kLayoutNames, s.layout);
  j["iv_offset_after_3lls"] = s.iv_offset_after_3lls;
  j["key_offset_after_kssm"] = s.key_offset_after_kssm;
  j["extract_sizes"] = s.extract_sizes;
  j["target_extract"] = s.target_extract ? json(*s.target_extract) : json(nullptr);
  j["decoy_markers"] = s.decoy_markers;
  j["decoy_high_entropy_regions"] = s.decoy_high_entropy_regions;
  j["counter_decoys"] = s.counter_decoys;
  j["filler"] = name_of(kFillerNames, s.filler);
  j["explicit_nonce_style"] = name_of(kNonceNames, s.explicit_nonce_style);
  j["nonce_buffer_iv"] = name_of(kHypothesisNames, s.nonce_buffer_iv);
  j["plant_server_material"] = s.plant_server_material;
  j["rng_seed"] = s.rng_seed;
  return j;
}

json ground_truth_to_json(const Fixture& fx) {
  const auto& t = fx.truth;
  char suite[8];
  std::snprintf(suite, sizeof suite, "0x%04x", t.cipher_suite);
  json j;
  j["cipher_suite"] = suite;
  j["key_len_bytes"] = t.client.key.size();
  j["client"] = {{"key", to_hex(t.client.key)}, {"iv", to_hex(t.client.iv)}};
  j["server"] = {{"key", to_hex(t.server.key)}, {"iv", to_hex(t.server.iv)}};
  j["first_client_nonce"] = to_hex(t.first_client_nonce);
  j["plaintext_client"] = to_hex(t.plaintext_client);
  j["plaintext_server"] = to_hex(t.plaintext_server);
  json planted = json::array();
  for (const auto& p : t.planted)
    planted.push_back({{"what", p.what},
                       {"extract", fx.extracts[p.extract_id].name},
                       {"extract_id", p.extract_id},
                       {"offset", p.offset},
                       {"value", to_hex(p.value)}});
  j["planted"] = planted;
  return j;
}

}  // namespace tlsmem::fixtures
