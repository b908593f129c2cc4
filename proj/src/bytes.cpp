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

#include "tlsmem/bytes.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>

#include "tlsmem/error.hpp"

namespace tlsmem {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnsupportedCipherSuite: return "UnsupportedCipherSuite";
    case Errc::NoApplicationData: return "NoApplicationData";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::AmbiguousStream: return "AmbiguousStream";
    case Errc::EmptyDirectory: return "EmptyDirectory";
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::EmptySegment: return "EmptySegment";
    case Errc::BadKeyLength: return "BadKeyLength";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::SpecInvalid: return "SpecInvalid";
  }
  return "Unknown";
}

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::InvalidArgument, "odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::InvalidArgument, "bad hex digit in '" + std::string(hex) + "'");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::vector<std::size_t> find_all(ByteView haystack, ByteView needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > haystack.size()) return hits;
  const std::boyer_moore_horspool_searcher searcher(needle.begin(), needle.end());
  auto it = haystack.begin();
  while (true) {
    auto found = std::search(it, haystack.end(), searcher);
    if (found == haystack.end()) break;
    hits.push_back(static_cast<std::size_t>(found - haystack.begin()));
    it = found + 1;
  }
  return hits;
}

std::string printable(ByteView data) {
  std::string out;
  out.reserve(data.size());
  for (auto b : data) {
    if ((b >= 0x20 && b < 0x7f) || b == '\r' || b == '\n' || b == '\t')
      out.push_back(static_cast<char>(b));
    else
      out.push_back('.');
  }
  return out;
}

std::string hex_ascii_dump(ByteView data) {
  std::string out;
  char buf[16];
  for (std::size_t row = 0; row < data.size(); row += 16) {
    std::snprintf(buf, sizeof buf, "%08zx  ", row);
    out += buf;
    for (std::size_t i = 0; i < 16; ++i) {
      if (row + i < data.size()) {
        std::snprintf(buf, sizeof buf, "%02x ", data[row + i]);
        out += buf;
      } else {
        out += "   ";
      }
      if (i == 7) out += ' ';
    }
    out += " |";
    for (std::size_t i = 0; i < 16 && row + i < data.size(); ++i) {
      auto b = data[row + i];
      out.push_back(b >= 0x20 && b < 0x7f ? static_cast<char>(b) : '.');
    }
    out += "|\n";
  }
  return out;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::UnreadableFile, path);
  const auto size = in.tellg();
  if (size < 0) throw Error(Errc::UnreadableFile, path);
  Bytes data(static_cast<std::size_t>(size));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), size);
  if (!in) throw Error(Errc::UnreadableFile, path);
  return data;
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::InvalidArgument, "write failed: " + path);
}

}  // namespace tlsmem
