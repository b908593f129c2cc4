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
#include <map>

#include "tlsmem/capture.hpp"
#include "tlsmem/error.hpp"

namespace tlsmem {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::uint32_t kLinkRaw = 101;
constexpr std::uint32_t kLinkIpv4 = 228;
constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint8_t kTcpSyn = 0x02;
constexpr std::uint8_t kTcpAck = 0x10;

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MalformedRecord, "pcap: " + what); }

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

struct Segment {
  TcpEndpoint src;
  TcpEndpoint dst;
  std::uint32_t seq = 0;
  std::uint8_t flags = 0;
  ByteView payload;
};

std::optional<Segment> decode_ipv4_tcp(ByteView ip) {
  if (ip.size() < 20 || (ip[0] >> 4) != 4) return std::nullopt;
  const std::size_t ihl = std::size_t(ip[0] & 0x0f) * 4;
  const std::size_t total = load_be16(ip.data() + 2);
  if (ihl < 20 || total < ihl || total > ip.size()) malformed("bad IPv4 header");
  if (ip[9] != 6) return std::nullopt;
  const std::uint16_t frag = load_be16(ip.data() + 6);
  if ((frag & 0x3fff) != 0) malformed("fragmented IPv4 is not supported");
  ByteView tcp = ip.subspan(ihl, total - ihl);
  if (tcp.size() < 20) malformed("truncated TCP header");
  const std::size_t doff = std::size_t(tcp[12] >> 4) * 4;
  if (doff < 20 || doff > tcp.size()) malformed("bad TCP data offset");
  Segment seg;
  std::copy_n(ip.data() + 12, 4, seg.src.addr.begin());
  std::copy_n(ip.data() + 16, 4, seg.dst.addr.begin());
  seg.src.port = load_be16(tcp.data());
  seg.dst.port = load_be16(tcp.data() + 2);
  seg.seq = load_be32(tcp.data() + 4);
  seg.flags = tcp[13];
  seg.payload = tcp.subspan(doff);
  return seg;
}

struct HalfStream {
  bool started = false;
  std::uint32_t next_seq = 0;
  Bytes data;
  // (stream end offset, packet index) per appended chunk
  std::vector<std::pair<std::size_t, std::uint64_t>> chunks;

  void add(const Segment& seg, std::uint64_t packet_index) {
    if (seg.flags & kTcpSyn) {
      next_seq = seg.seq + 1;
      started = true;
      return;
    }
    if (seg.payload.empty()) return;
    if (!started) {
      next_seq = seg.seq;
      started = true;
    }
    const auto rel = static_cast<std::int32_t>(seg.seq - next_seq);
    if (rel > 0) malformed("out-of-order or missing TCP segment");
    const std::size_t skip = static_cast<std::size_t>(-static_cast<std::int64_t>(rel));
    if (skip >= seg.payload.size()) return;  // retransmission
    ByteView fresh = seg.payload.subspan(skip);
    data.insert(data.end(), fresh.begin(), fresh.end());
    next_seq += static_cast<std::uint32_t>(fresh.size());
    chunks.emplace_back(data.size(), packet_index);
  }

  std::uint64_t packet_of(std::size_t end_offset) const {
    auto it = std::lower_bound(chunks.begin(), chunks.end(), end_offset,
                               [](const auto& c, std::size_t off) { return c.first < off; });
    return it == chunks.end() ? chunks.back().second : it->second;
  }
};

struct Flow {
  TcpEndpoint first_sender;
  std::optional<TcpEndpoint> syn_sender;
  std::map<TcpEndpoint, HalfStream> halves;
  std::uint64_t first_packet = 0;
};

bool looks_like_tls(const Bytes& d) { return d.size() >= 3 && d[0] == 0x16 && d[1] == 0x03; }
bool starts_with_client_hello(const Bytes& d) { return looks_like_tls(d) && d.size() >= 6 && d[5] == 1; }

}  // namespace

SessionCapture parse_pcap(ByteView pcap, const std::optional<SessionFilter>& filter) {
  if (pcap.size() < 24) malformed("file shorter than global header");
  std::uint32_t magic;
  std::memcpy(&magic, pcap.data(), 4);
  bool swapped;
  if (magic == kMagicMicros || magic == kMagicNanos)
    swapped = false;
  else if (swap32(magic) == kMagicMicros || swap32(magic) == kMagicNanos)
    swapped = true;
  else
    malformed("unrecognized magic number");
  auto rd32 = [&](std::size_t off) {
    std::uint32_t v;
    std::memcpy(&v, pcap.data() + off, 4);
    return swapped ? swap32(v) : v;
  };
  const std::uint32_t linktype = rd32(20);
  if (linktype != kLinkEthernet && linktype != kLinkRaw && linktype != kLinkIpv4)
    malformed("unsupported link type " + std::to_string(linktype));

  std::map<std::pair<TcpEndpoint, TcpEndpoint>, Flow> flows;
  std::size_t pos = 24;
  std::uint64_t index = 0;
  while (pos < pcap.size()) {
    if (pcap.size() - pos < 16) malformed("truncated packet header");
    const std::uint32_t incl = rd32(pos + 8);
    pos += 16;
    if (pcap.size() - pos < incl) malformed("truncated packet data");
    ByteView frame = pcap.subspan(pos, incl);
    pos += incl;
    const std::uint64_t pkt = index++;

    ByteView ip = frame;
    if (linktype == kLinkEthernet) {
      if (frame.size() < 14) continue;
      std::size_t off = 12;
      std::uint16_t ethertype = load_be16(frame.data() + off);
      if (ethertype == kEtherVlan) {
        if (frame.size() < 18) continue;
        off += 4;
        ethertype = load_be16(frame.data() + off);
      }
      if (ethertype != kEtherIpv4) continue;
      ip = frame.subspan(off + 2);
    }
    auto seg = decode_ipv4_tcp(ip);
    if (!seg) continue;

    const auto key = std::minmax(seg->src, seg->dst);
    auto [it, fresh] = flows.try_emplace({key.first, key.second});
    Flow& flow = it->second;
    if (fresh) {
      flow.first_sender = seg->src;
      flow.first_packet = pkt;
    }
    if ((seg->flags & kTcpSyn) && !(seg->flags & kTcpAck) && !flow.syn_sender) flow.syn_sender = seg->src;
    flow.halves[seg->src].add(*seg, pkt);
  }

  std::vector<const Flow*> tls_flows;
  for (const auto& [key, flow] : flows) {
    bool tls = false;
    for (const auto& [ep, half] : flow.halves) tls = tls || looks_like_tls(half.data);
    if (!tls) continue;
    if (filter) {
      const bool match = (key.first == filter->a && key.second == filter->b) ||
                         (key.first == filter->b && key.second == filter->a);
      if (!match) continue;
    }
    tls_flows.push_back(&flow);
  }
  if (tls_flows.empty())
    throw Error(filter ? Errc::InvalidArgument : Errc::MalformedRecord,
                filter ? "no TLS stream matches the session filter" : "pcap: no TLS stream found");
  if (tls_flows.size() > 1)
    throw Error(Errc::AmbiguousStream, std::to_string(tls_flows.size()) + " TLS streams and no filter");

  const Flow& flow = *tls_flows.front();
  TcpEndpoint client = flow.first_sender;
  if (flow.syn_sender) {
    client = *flow.syn_sender;
  } else {
    for (const auto& [ep, half] : flow.halves)
      if (starts_with_client_hello(half.data)) client = ep;
  }
  static const HalfStream kEmpty;
  const HalfStream* client_half = &kEmpty;
  const HalfStream* server_half = &kEmpty;
  for (const auto& [ep, half] : flow.halves) (ep == client ? client_half : server_half) = &half;

  auto split = [](const HalfStream& half, std::vector<TlsRecord>& recs, std::vector<std::uint64_t>& keys) {
    for (auto& sr : detail::split_records_with_offsets(half.data)) {
      keys.push_back(half.packet_of(sr.end_offset));
      recs.push_back(std::move(sr.record));
    }
  };
  std::vector<TlsRecord> crecs, srecs;
  std::vector<std::uint64_t> ckeys, skeys;
  split(*client_half, crecs, ckeys);
  split(*server_half, srecs, skeys);
  return detail::assemble_session(crecs, srecs, ckeys, skeys);
}

}  // namespace tlsmem
