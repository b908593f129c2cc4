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

#include "tlsmem/capture.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>

#include "tlsmem/error.hpp"

namespace tlsmem {

namespace {

struct SuiteInfo {
  std::uint16_t id;
  std::size_t key_len;
};

// TLS 1.2 AES-GCM suites from the IANA registry (RFC 5288, 5289, 5487).
constexpr SuiteInfo kGcmSuites[] = {
    {0x009C, 16}, {0x009D, 32},  // RSA
    {0x009E, 16}, {0x009F, 32},  // DHE_RSA
    {0x00A0, 16}, {0x00A1, 32},  // DH_RSA
    {0x00A2, 16}, {0x00A3, 32},  // DHE_DSS
    {0x00A4, 16}, {0x00A5, 32},  // DH_DSS
    {0x00A6, 16}, {0x00A7, 32},  // DH_anon
    {0x00A8, 16}, {0x00A9, 32},  // PSK
    {0x00AA, 16}, {0x00AB, 32},  // DHE_PSK
    {0x00AC, 16}, {0x00AD, 32},  // RSA_PSK
    {0xC02B, 16}, {0xC02C, 32},  // ECDHE_ECDSA
    {0xC02D, 16}, {0xC02E, 32},  // ECDH_ECDSA
    {0xC02F, 16}, {0xC030, 32},  // ECDHE_RSA
    {0xC031, 16}, {0xC032, 32},  // ECDH_RSA
};

constexpr std::uint8_t kServerHello = 2;
constexpr std::uint16_t kSupportedVersionsExt = 0x002b;

bool known_content_type(std::uint8_t t) { return t >= 20 && t <= 23; }

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedRecord, what); }

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  ByteView take(std::size_t n, const char* what) {
    if (remaining() < n) malformed(std::string("truncated ") + what);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint16_t u16(const char* what) { return load_be16(take(2, what).data()); }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

HandshakeSummary summarize_server_hello(ByteView body) {
  Reader r(body);
  const std::uint16_t version = r.u16("ServerHello version");
  r.take(32, "ServerHello random");
  const std::uint8_t sid_len = r.u8("ServerHello session id");
  r.take(sid_len, "ServerHello session id");
  const std::uint16_t suite = r.u16("ServerHello cipher suite");
  r.u8("ServerHello compression");

  std::uint16_t negotiated = version;
  if (r.remaining() > 0) {
    const std::uint16_t ext_total = r.u16("ServerHello extensions");
    Reader ext(r.take(ext_total, "ServerHello extensions"));
    while (ext.remaining() > 0) {
      const std::uint16_t type = ext.u16("extension type");
      const std::uint16_t len = ext.u16("extension length");
      ByteView value = ext.take(len, "extension body");
      if (type == kSupportedVersionsExt && value.size() == 2) negotiated = load_be16(value.data());
    }
  }
  if (negotiated != kTls12)
    throw Error(Errc::UnsupportedCipherSuite, "negotiated protocol version is not TLS 1.2");

  const auto key_len = gcm_key_length(suite);
  if (!key_len) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04x", suite);
    throw Error(Errc::UnsupportedCipherSuite, std::string("cipher suite ") + buf + " is not AES-GCM");
  }
  HandshakeSummary hs;
  hs.tls_version = negotiated;
  hs.cipher_suite = suite;
  hs.key_len_bytes = *key_len;
  hs.aead = true;
  return hs;
}

// Plaintext handshake bytes of one direction, up to its ChangeCipherSpec.
std::optional<HandshakeSummary> find_server_hello(ByteView handshake_bytes) {
  Reader r(handshake_bytes);
  while (r.remaining() >= 4) {
    const std::uint8_t type = r.u8("handshake type");
    const std::uint32_t len = load_be24(r.take(3, "handshake length").data());
    if (r.remaining() < len) return std::nullopt;
    ByteView body = r.take(len, "handshake body");
    if (type == kServerHello) return summarize_server_hello(body);
  }
  return std::nullopt;
}

struct DirectionState {
  Bytes handshake_bytes;
  std::vector<EncryptedRecord> encrypted;
  std::vector<std::uint64_t> keys;
};

DirectionState walk_direction(const std::vector<TlsRecord>& records,
                              const std::vector<std::uint64_t>& keys, Direction dir) {
  if (keys.size() != records.size())
    throw Error(Errc::InvalidArgument, "ordering keys do not match record count");
  DirectionState st;
  bool encrypted = false;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TlsRecord& rec = records[i];
    if (rec.content_type == ContentType::ChangeCipherSpec) {
      if (encrypted) malformed("second ChangeCipherSpec (renegotiation is not supported)");
      encrypted = true;
      continue;
    }
    if (!encrypted) {
      if (rec.content_type == ContentType::Handshake)
        st.handshake_bytes.insert(st.handshake_bytes.end(), rec.payload.begin(), rec.payload.end());
      else if (rec.content_type == ContentType::ApplicationData)
        malformed("ApplicationData before ChangeCipherSpec");
      continue;
    }
    if (rec.payload.size() < kExplicitNonceLen + kGcmTagLen)
      malformed("encrypted record shorter than explicit nonce plus tag");
    EncryptedRecord er;
    er.direction = dir;
    er.seq = seq++;
    std::copy_n(rec.payload.begin(), kExplicitNonceLen, er.explicit_nonce.begin());
    er.ciphertext.assign(rec.payload.begin() + kExplicitNonceLen, rec.payload.end());
    er.record_version = rec.legacy_version;
    er.content_type = rec.content_type;
    st.encrypted.push_back(std::move(er));
    st.keys.push_back(keys[i]);
  }
  return st;
}

TlsRecord hello_record(std::uint8_t hs_type, std::uint16_t suite) {
  Bytes body;
  append_be16(body, kTls12);
  body.insert(body.end(), 32, 0);  // random
  body.push_back(0);               // session id
  if (hs_type == 1) append_be16(body, 2);
  append_be16(body, suite);
  if (hs_type == 1) body.push_back(1);
  body.push_back(0);  // null compression
  TlsRecord rec;
  rec.content_type = ContentType::Handshake;
  rec.payload.push_back(hs_type);
  rec.payload.push_back(0);
  append_be16(rec.payload, static_cast<std::uint16_t>(body.size()));
  rec.payload.insert(rec.payload.end(), body.begin(), body.end());
  return rec;
}

}  // namespace

std::string_view direction_name(Direction d) {
  return d == Direction::ClientToServer ? "client_to_server" : "server_to_client";
}

std::optional<std::size_t> SessionCapture::first_app_data(Direction dir) const {
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].direction == dir && records[i].content_type == ContentType::ApplicationData) return i;
  return std::nullopt;
}

std::optional<std::size_t> gcm_key_length(std::uint16_t cipher_suite) {
  for (const auto& s : kGcmSuites)
    if (s.id == cipher_suite) return s.key_len;
  return std::nullopt;
}

std::vector<std::uint16_t> supported_cipher_suites() {
  std::vector<std::uint16_t> out;
  for (const auto& s : kGcmSuites) out.push_back(s.id);
  return out;
}

namespace detail {

std::vector<StreamRecord> split_records_with_offsets(ByteView stream) {
  std::vector<StreamRecord> out;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    if (stream.size() - pos < 5) malformed("truncated record header");
    const std::uint8_t* h = stream.data() + pos;
    if (!known_content_type(h[0])) malformed("unknown content type " + std::to_string(h[0]));
    if (h[1] != 3) malformed("record version major is not 3");
    const std::size_t len = load_be16(h + 3);
    if (len > kMaxRecordPayload) malformed("record length " + std::to_string(len) + " exceeds limit");
    if (stream.size() - pos - 5 < len) malformed("record payload truncated");
    StreamRecord sr;
    sr.record.content_type = static_cast<ContentType>(h[0]);
    sr.record.legacy_version = load_be16(h + 1);
    sr.record.payload.assign(h + 5, h + 5 + len);
    pos += 5 + len;
    sr.end_offset = pos;
    out.push_back(std::move(sr));
  }
  return out;
}

SessionCapture assemble_session(const std::vector<TlsRecord>& client,
                                const std::vector<TlsRecord>& server,
                                const std::vector<std::uint64_t>& client_keys,
                                const std::vector<std::uint64_t>& server_keys) {
  DirectionState c = walk_direction(client, client_keys, Direction::ClientToServer);
  DirectionState s = walk_direction(server, server_keys, Direction::ServerToClient);

  auto hs = find_server_hello(s.handshake_bytes);
  if (!hs) malformed("no ServerHello in server handshake");

  SessionCapture cap;
  cap.handshake = *hs;
  std::size_t i = 0, j = 0;
  while (i < c.encrypted.size() || j < s.encrypted.size()) {
    const bool take_client =
        j == s.encrypted.size() || (i < c.encrypted.size() && c.keys[i] <= s.keys[j]);
    if (take_client)
      cap.records.push_back(std::move(c.encrypted[i++]));
    else
      cap.records.push_back(std::move(s.encrypted[j++]));
  }
  auto first = cap.first_app_data(Direction::ClientToServer);
  if (!first) throw Error(Errc::NoApplicationData, "no client ApplicationData record");
  cap.first_explicit_nonce = cap.records[*first].explicit_nonce;
  return cap;
}

}  // namespace detail

std::vector<TlsRecord> split_records(ByteView stream) {
  std::vector<TlsRecord> out;
  for (auto& sr : detail::split_records_with_offsets(stream)) out.push_back(std::move(sr.record));
  return out;
}

Bytes serialize_record(const TlsRecord& record) {
  if (record.payload.size() > kMaxRecordPayload) malformed("record payload too large");
  Bytes out;
  out.reserve(5 + record.payload.size());
  out.push_back(static_cast<std::uint8_t>(record.content_type));
  append_be16(out, record.legacy_version);
  append_be16(out, static_cast<std::uint16_t>(record.payload.size()));
  out.insert(out.end(), record.payload.begin(), record.payload.end());
  return out;
}

SessionCapture parse_raw_records(ByteView client_stream, ByteView server_stream) {
  const auto client = split_records(client_stream);
  const auto server = split_records(server_stream);
  // Alternate by encrypted-record index; plaintext records get key 0.
  auto keys_for = [](const std::vector<TlsRecord>& recs, std::uint64_t parity) {
    std::vector<std::uint64_t> keys;
    bool encrypted = false;
    std::uint64_t n = 0;
    for (const auto& r : recs) {
      if (r.content_type == ContentType::ChangeCipherSpec && !encrypted) {
        encrypted = true;
        keys.push_back(0);
        continue;
      }
      keys.push_back(encrypted ? 2 * n++ + parity : 0);
    }
    return keys;
  };
  return detail::assemble_session(client, server, keys_for(client, 0), keys_for(server, 1));
}

SessionCapture load_raw_capture(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  const Bytes client = read_file((dir / "client.tls").string());
  const Bytes server = read_file((dir / "server.tls").string());
  return parse_raw_records(client, server);
}

std::pair<Bytes, Bytes> serialize_raw_records(const SessionCapture& capture) {
  const TlsRecord ccs{ContentType::ChangeCipherSpec, kTls12, Bytes{1}};
  Bytes client = serialize_record(hello_record(1, capture.handshake.cipher_suite));
  Bytes server = serialize_record(hello_record(kServerHello, capture.handshake.cipher_suite));
  for (Bytes* out : {&client, &server}) {
    const Bytes c = serialize_record(ccs);
    out->insert(out->end(), c.begin(), c.end());
  }
  for (const auto& er : capture.records) {
    TlsRecord rec;
    rec.content_type = er.content_type;
    rec.legacy_version = er.record_version;
    rec.payload.assign(er.explicit_nonce.begin(), er.explicit_nonce.end());
    rec.payload.insert(rec.payload.end(), er.ciphertext.begin(), er.ciphertext.end());
    const Bytes wire = serialize_record(rec);
    Bytes& out = er.direction == Direction::ClientToServer ? client : server;
    out.insert(out.end(), wire.begin(), wire.end());
  }
  return {std::move(client), std::move(server)};
}

std::optional<TcpEndpoint> parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  TcpEndpoint ep;
  std::string_view host = text.substr(0, colon);
  for (int i = 0; i < 4; ++i) {
    const auto dot = i < 3 ? host.find('.') : host.size();
    if (dot == std::string_view::npos) return std::nullopt;
    unsigned v = 0;
    auto [p, ec] = std::from_chars(host.data(), host.data() + dot, v);
    if (ec != std::errc{} || p != host.data() + dot || v > 255) return std::nullopt;
    ep.addr[i] = static_cast<std::uint8_t>(v);
    host.remove_prefix(std::min(dot + 1, host.size()));
  }
  std::string_view port = text.substr(colon + 1);
  unsigned pv = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), pv);
  if (ec != std::errc{} || p != port.data() + port.size() || pv > 65535) return std::nullopt;
  ep.port = static_cast<std::uint16_t>(pv);
  return ep;
}

CaptureFormat detect_capture_format(const std::string& path) {
  return std::filesystem::is_directory(path) ? CaptureFormat::RawRecords : CaptureFormat::Pcap;
}

SessionCapture parse_capture(const std::string& path, CaptureFormat format,
                             const std::optional<SessionFilter>& filter) {
  if (format == CaptureFormat::RawRecords) return load_raw_capture(path);
  const Bytes data = read_file(path);
  return parse_pcap(data, filter);
}

NonceStyle explicit_nonce_style(const SessionCapture& capture, std::uint64_t counter_bound) {
  auto first = capture.first_app_data(Direction::ClientToServer);
  if (!first) throw Error(Errc::NoApplicationData, "no client ApplicationData record");
  const std::uint64_t v = load_be64(capture.records[*first].explicit_nonce.data());
  return v < counter_bound ? NonceStyle::CounterLike : NonceStyle::RandomLike;
}

}  // namespace tlsmem
