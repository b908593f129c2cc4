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

// Test-only oracles. Deliberately naive and written without reference to
// the library internals they check.

#ifndef TLSMEM_TESTS_SUPPORT_HPP
#define TLSMEM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <sys/wait.h>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tlsmem/bytes.hpp"
#include "tlsmem/capture.hpp"
#include "tlsmem/extracts.hpp"
#include "tlsmem/scan.hpp"

namespace testsupport {

using tlsmem::Bytes;
using tlsmem::ByteView;

inline std::vector<std::size_t> naive_find(ByteView h, ByteView n) {
  std::vector<std::size_t> out;
  if (n.empty() || n.size() > h.size()) return out;
  for (std::size_t i = 0; i + n.size() <= h.size(); ++i) {
    bool eq = true;
    for (std::size_t j = 0; j < n.size() && eq; ++j) eq = h[i + j] == n[j];
    if (eq) out.push_back(i);
  }
  return out;
}

// Histogram entropy from a std::map, summed in long double.
inline double naive_entropy(ByteView seg) {
  std::map<std::uint8_t, std::size_t> hist;
  for (auto b : seg) ++hist[b];
  long double h = 0;
  for (const auto& [b, c] : hist) {
    const long double p = static_cast<long double>(c) / seg.size();
    h -= p * std::log2(p);
  }
  return static_cast<double>(h);
}

struct NaiveWindows {
  // (extract, offset, value) for the first sighting of each value
  std::vector<std::tuple<std::size_t, std::size_t, Bytes>> keys;
  std::vector<std::tuple<std::size_t, std::size_t, Bytes>> ivs;
  std::size_t mssk_markers = 0;
  std::size_t ssl3_markers = 0;
};

inline NaiveWindows naive_scan_windows(const tlsmem::ExtractSet& set, const tlsmem::ScanConfig& cfg) {
  NaiveWindows out;
  std::set<Bytes> seen_k, seen_v;
  std::vector<std::size_t> order;
  for (int band : {1, 2, 3})
    for (const auto& ex : set.extracts()) {
      const std::size_t sz = ex.data.size();
      const int b = sz >= 8 * tlsmem::kMiB ? 3 : sz >= tlsmem::kMiB ? 1 : 2;
      if (b == band) order.push_back(ex.id);
    }
  const Bytes kssm{'K', 'S', 'S', 'M'}, lls{'3', 'L', 'L', 'S'};
  for (std::size_t id : order) {
    const Bytes& d = set[id].data;
    const auto km = naive_find(d, kssm);
    if (km.empty()) continue;
    const auto im = naive_find(d, lls);
    out.mssk_markers += km.size();
    out.ssl3_markers += im.size();
    for (std::size_t m : im)
      for (std::size_t off = m + 4; off < m + 4 + cfg.max_iv_distance && off + 4 <= d.size(); off += cfg.step) {
        Bytes w(d.begin() + off, d.begin() + off + 4);
        if (naive_entropy(w) > cfg.iv_entropy_threshold && seen_v.insert(w).second) out.ivs.emplace_back(id, off, w);
      }
    for (std::size_t m : km)
      for (std::size_t off = m + 4; off < m + 4 + cfg.max_key_distance && off + cfg.key_len_bytes <= d.size();
           off += cfg.step) {
        Bytes w(d.begin() + off, d.begin() + off + cfg.key_len_bytes);
        if (naive_entropy(w) > cfg.key_entropy_threshold && seen_k.insert(w).second) out.keys.emplace_back(id, off, w);
      }
  }
  auto by_loc = [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  };
  std::sort(out.keys.begin(), out.keys.end(), by_loc);
  std::sort(out.ivs.begin(), out.ivs.end(), by_loc);
  return out;
}

struct NaiveBlock {
  std::size_t extract = 0;
  std::size_t offset = 0;
  int hypothesis = 0;  // 0 IV in client slot, 1 IV in server slot
  Bytes bytes;         // 2k + 8 bytes of the block

  auto operator<=>(const NaiveBlock&) const = default;
};

struct NaiveStandard {
  std::vector<NaiveBlock> before_pruning;
  std::vector<NaiveBlock> after_pruning;
};

inline NaiveStandard naive_scan_standard(const tlsmem::ExtractSet& set, ByteView nonce,
                                         const tlsmem::ScanConfig& cfg) {
  const std::size_t k = cfg.key_len_bytes;
  std::set<Bytes> ivs;
  for (const auto& ex : set.extracts())
    for (std::size_t o : naive_find(ex.data, nonce)) {
      if (o < 4) continue;
      Bytes iv(ex.data.begin() + o - 4, ex.data.begin() + o);
      if (naive_entropy(iv) > cfg.iv_entropy_threshold) ivs.insert(iv);
    }
  NaiveStandard out;
  for (const auto& ex : set.extracts()) {
    const Bytes& d = ex.data;
    auto gate = [&](std::size_t at) {
      return naive_entropy(ByteView(d).subspan(at, k)) > cfg.key_entropy_threshold;
    };
    for (const auto& iv : ivs)
      for (std::size_t p : naive_find(d, iv)) {
        for (int hyp = 0; hyp < 2; ++hyp) {
          const std::size_t lead = 2 * k + (hyp ? 4 : 0);
          if (p < lead) continue;
          const std::size_t start = p - lead;
          if (start + 2 * k + 8 > d.size()) continue;
          if (!gate(start) || !gate(start + k)) continue;
          out.before_pruning.push_back({ex.id, start, hyp, Bytes(d.begin() + start, d.begin() + start + 2 * k + 8)});
        }
      }
  }
  std::sort(out.before_pruning.begin(), out.before_pruning.end());
  out.before_pruning.erase(std::unique(out.before_pruning.begin(), out.before_pruning.end()), out.before_pruning.end());
  std::map<std::pair<std::size_t, int>, std::size_t> last;
  for (const auto& b : out.before_pruning) {
    auto key = std::make_pair(b.extract, b.hypothesis);
    auto it = last.find(key);
    if (it != last.end() && b.offset - it->second < cfg.min_artefact_gap) continue;
    last[key] = b.offset;
    out.after_pruning.push_back(b);
  }
  return out;
}

inline NaiveBlock to_naive(const tlsmem::CandidateKeyBlock& b) {
  NaiveBlock n{b.extract_id, b.offset, b.hypothesis == tlsmem::BlockHypothesis::IvWasClient ? 0 : 1, {}};
  n.bytes = b.client_key;
  n.bytes.insert(n.bytes.end(), b.server_key.begin(), b.server_key.end());
  n.bytes.insert(n.bytes.end(), b.client_iv.begin(), b.client_iv.end());
  n.bytes.insert(n.bytes.end(), b.server_iv.begin(), b.server_iv.end());
  return n;
}

// Minimal classic-pcap writer for hand-built TCP captures.
class PcapBuilder {
 public:
  explicit PcapBuilder(std::uint32_t linktype = 1, bool nanos = false, bool big_endian = false)
      : linktype_(linktype), big_endian_(big_endian) {
    put32(nanos ? 0xa1b23c4d : 0xa1b2c3d4);
    put16(2);
    put16(4);
    put32(0);
    put32(0);
    put32(65535);
    put32(linktype);
  }

  struct Ep {
    std::array<std::uint8_t, 4> ip;
    std::uint16_t port;
  };

  void tcp(const Ep& src, const Ep& dst, std::uint32_t seq, std::uint8_t flags, ByteView payload, bool vlan = false) {
    Bytes tcp(20, 0);
    tcp[0] = src.port >> 8;
    tcp[1] = src.port & 0xff;
    tcp[2] = dst.port >> 8;
    tcp[3] = dst.port & 0xff;
    for (int i = 0; i < 4; ++i) tcp[4 + i] = static_cast<std::uint8_t>(seq >> (24 - 8 * i));
    tcp[12] = 5 << 4;
    tcp[13] = flags;
    tcp.insert(tcp.end(), payload.begin(), payload.end());
    Bytes ip(20, 0);
    ip[0] = 0x45;
    const std::size_t total = 20 + tcp.size();
    ip[2] = static_cast<std::uint8_t>(total >> 8);
    ip[3] = static_cast<std::uint8_t>(total);
    ip[8] = 64;
    ip[9] = 6;
    std::copy(src.ip.begin(), src.ip.end(), ip.begin() + 12);
    std::copy(dst.ip.begin(), dst.ip.end(), ip.begin() + 16);
    ip.insert(ip.end(), tcp.begin(), tcp.end());
    Bytes frame;
    if (linktype_ == 1) {
      frame.assign(12, 0xaa);
      if (vlan) frame.insert(frame.end(), {0x81, 0x00, 0x00, 0x05});
      frame.insert(frame.end(), {0x08, 0x00});
    }
    frame.insert(frame.end(), ip.begin(), ip.end());
    put32(++ts_);
    put32(0);
    put32(static_cast<std::uint32_t>(frame.size()));
    put32(static_cast<std::uint32_t>(frame.size()));
    data_.insert(data_.end(), frame.begin(), frame.end());
  }

  const Bytes& bytes() const { return data_; }

 private:
  void put16(std::uint16_t v) {
    if (big_endian_) {
      data_.push_back(v >> 8);
      data_.push_back(v & 0xff);
    } else {
      data_.push_back(v & 0xff);
      data_.push_back(v >> 8);
    }
  }
  void put32(std::uint32_t v) {
    if (big_endian_) {
      put16(v >> 16);
      put16(v & 0xffff);
    } else {
      put16(v & 0xffff);
      put16(v >> 16);
    }
  }

  std::uint32_t linktype_;
  bool big_endian_;
  std::uint32_t ts_ = 0;
  Bytes data_;
};

// A client/server TCP conversation carrying two TLS record streams. Each
// stream is cut into `segment` byte pieces; pieces alternate by record
// boundaries in the order given by `schedule` (true = client next).
struct Conversation {
  PcapBuilder::Ep client{{10, 0, 0, 1}, 49152};
  PcapBuilder::Ep server{{10, 0, 0, 2}, 443};
  std::uint32_t client_isn = 1000;
  std::uint32_t server_isn = 5000;
  bool handshake = true;
};

inline void write_conversation(PcapBuilder& pcap, const Conversation& conv, ByteView client_stream,
                               ByteView server_stream, std::size_t segment = 1400) {
  constexpr std::uint8_t kSyn = 0x02, kAck = 0x10, kPsh = 0x08;
  std::uint32_t cseq = conv.client_isn, sseq = conv.server_isn;
  if (conv.handshake) {
    pcap.tcp(conv.client, conv.server, cseq, kSyn, {});
    pcap.tcp(conv.server, conv.client, sseq, kSyn | kAck, {});
    ++cseq;
    ++sseq;
    pcap.tcp(conv.client, conv.server, cseq, kAck, {});
  }
  // Interleave whole records: client record, server record, ...
  const auto crecs = tlsmem::detail::split_records_with_offsets(client_stream);
  const auto srecs = tlsmem::detail::split_records_with_offsets(server_stream);
  std::size_t ci = 0, si = 0, cpos = 0, spos = 0;
  auto send = [&](bool client, std::size_t end) {
    std::size_t& pos = client ? cpos : spos;
    ByteView stream = client ? client_stream : server_stream;
    std::uint32_t& seq = client ? cseq : sseq;
    while (pos < end) {
      const std::size_t n = std::min(segment, end - pos);
      pcap.tcp(client ? conv.client : conv.server, client ? conv.server : conv.client, seq, kAck | kPsh,
               stream.subspan(pos, n));
      seq += static_cast<std::uint32_t>(n);
      pos += n;
    }
  };
  while (ci < crecs.size() || si < srecs.size()) {
    if (ci < crecs.size()) send(true, crecs[ci++].end_offset);
    if (si < srecs.size()) send(false, srecs[si++].end_offset);
  }
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("tlsmem_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

// Runs the tlsmem executable through the shell; stderr goes to `err_path`
// when given, otherwise it is discarded.
inline CliRun run_cli(const std::string& args, const std::string& err_path = "") {
#ifdef TLSMEM_CLI_PATH
  const std::string cmd = std::string("'") + TLSMEM_CLI_PATH + "' " + args + " 2>" +
                          (err_path.empty() ? std::string("/dev/null") : "'" + err_path + "'");
#else
  const std::string cmd = "tlsmem " + args;
#endif
  CliRun r;
  FILE* f = ::popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  const int status = ::pclose(f);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace testsupport

#endif  // TLSMEM_TESTS_SUPPORT_HPP
