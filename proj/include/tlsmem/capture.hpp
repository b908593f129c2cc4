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

#ifndef TLSMEM_CAPTURE_HPP
#define TLSMEM_CAPTURE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlsmem/bytes.hpp"

namespace tlsmem {

enum class ContentType : std::uint8_t {
  ChangeCipherSpec = 20,
  Alert = 21,
  Handshake = 22,
  ApplicationData = 23,
};

enum class Direction { ClientToServer, ServerToClient };

std::string_view direction_name(Direction d);

inline constexpr std::size_t kMaxRecordPayload = (1u << 14) + 2048;
inline constexpr std::size_t kExplicitNonceLen = 8;
inline constexpr std::size_t kImplicitIvLen = 4;
inline constexpr std::size_t kGcmTagLen = 16;
inline constexpr std::uint16_t kTls12 = 0x0303;

using ExplicitNonce = std::array<std::uint8_t, kExplicitNonceLen>;
using ImplicitIv = std::array<std::uint8_t, kImplicitIvLen>;

struct TlsRecord {
  ContentType content_type{};
  std::uint16_t legacy_version = kTls12;
  Bytes payload;

  bool operator==(const TlsRecord&) const = default;
};

struct HandshakeSummary {
  std::uint16_t tls_version = kTls12;
  std::uint16_t cipher_suite = 0;
  std::size_t key_len_bytes = 0;
  bool aead = false;
  std::size_t explicit_nonce_len = kExplicitNonceLen;
  std::size_t implicit_iv_len = kImplicitIvLen;

  bool operator==(const HandshakeSummary&) const = default;
};

struct EncryptedRecord {
  Direction direction{};
  std::uint64_t seq = 0;
  ExplicitNonce explicit_nonce{};
  Bytes ciphertext;  // includes the trailing 16-byte tag
  std::uint16_t record_version = kTls12;
  ContentType content_type{};

  bool operator==(const EncryptedRecord&) const = default;
};

struct SessionCapture {
  HandshakeSummary handshake;
  std::vector<EncryptedRecord> records;
  ExplicitNonce first_explicit_nonce{};

  // Index into `records` of the first ApplicationData record sent in `dir`.
  std::optional<std::size_t> first_app_data(Direction dir) const;

  bool operator==(const SessionCapture&) const = default;
};

// AES-GCM TLS 1.2 suites only. Returns nullopt for anything else.
std::optional<std::size_t> gcm_key_length(std::uint16_t cipher_suite);
std::vector<std::uint16_t> supported_cipher_suites();

// Splits a TLS byte stream into records. Throws MalformedRecord on a short
// header, a truncated payload, an oversize length field or an unknown type.
std::vector<TlsRecord> split_records(ByteView stream);
Bytes serialize_record(const TlsRecord& record);

// Raw-record input: one stream per direction as it appeared on the wire.
// Encrypted records of the two directions are interleaved alternately,
// client first, since the streams carry no timing.
SessionCapture parse_raw_records(ByteView client_stream, ByteView server_stream);

// Reads `client.tls` and `server.tls` from `directory`.
SessionCapture load_raw_capture(const std::string& directory);

// Inverse of parse_raw_records: a minimal ClientHello/ServerHello/CCS prefix
// followed by the capture's encrypted records. Reparsing yields `capture`.
std::pair<Bytes, Bytes> serialize_raw_records(const SessionCapture& capture);

struct TcpEndpoint {
  std::array<std::uint8_t, 4> addr{};
  std::uint16_t port = 0;

  bool operator==(const TcpEndpoint&) const = default;
  auto operator<=>(const TcpEndpoint&) const = default;
};

// Matches a stream in either orientation.
struct SessionFilter {
  TcpEndpoint a;
  TcpEndpoint b;
};

std::optional<TcpEndpoint> parse_endpoint(std::string_view text);  // "10.0.0.1:443"

SessionCapture parse_pcap(ByteView pcap, const std::optional<SessionFilter>& filter = std::nullopt);

enum class CaptureFormat { Pcap, RawRecords };

// `raw_records` input is a directory; pcap input is a file.
SessionCapture parse_capture(const std::string& path, CaptureFormat format,
                             const std::optional<SessionFilter>& filter = std::nullopt);

// Pcap when `path` is a regular file, raw records when it is a directory.
CaptureFormat detect_capture_format(const std::string& path);

enum class NonceStyle { CounterLike, RandomLike };

inline constexpr std::uint64_t kDefaultCounterNonceBound = 256;

NonceStyle explicit_nonce_style(const SessionCapture& capture,
                                std::uint64_t counter_bound = kDefaultCounterNonceBound);

namespace detail {

struct StreamRecord {
  TlsRecord record;
  std::size_t end_offset = 0;  // stream offset one past the record
};

// Shared tail of raw and pcap parsing. `client_keys`/`server_keys` hold one
// ordering key per record of that direction; encrypted records of both
// directions are merged by key, ties favoring the client.
SessionCapture assemble_session(const std::vector<TlsRecord>& client,
                                const std::vector<TlsRecord>& server,
                                const std::vector<std::uint64_t>& client_keys,
                                const std::vector<std::uint64_t>& server_keys);

std::vector<StreamRecord> split_records_with_offsets(ByteView stream);

}  // namespace detail

}  // namespace tlsmem

#endif  // TLSMEM_CAPTURE_HPP
