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

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tlsmem/bytes.hpp"
#include "tlsmem/error.hpp"

using namespace tlsmem;

TEST(Hex, RoundTripAndCase) {
  const Bytes b{0x00, 0x7f, 0x80, 0xff, 0x3a};
  EXPECT_EQ(to_hex(b), "007f80ff3a");
  EXPECT_EQ(from_hex("007F80FF3a"), b);
  EXPECT_TRUE(from_hex("").empty());
}

TEST(Hex, RejectsBadInput) {
  try {
    from_hex("abc");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(BigEndian, Helpers) {
  const Bytes b{0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08};
  EXPECT_EQ(load_be16(b.data()), 0x0102);
  EXPECT_EQ(load_be24(b.data()), 0x010203u);
  EXPECT_EQ(load_be32(b.data()), 0x01020304u);
  EXPECT_EQ(load_be64(b.data()), 0x0102030405060708ull);
  Bytes out;
  append_be64(out, 0x0102030405060708ull);
  EXPECT_EQ(out, b);
  const auto arr = be64_array(1);
  EXPECT_EQ(to_hex(arr), "0000000000000001");
}

TEST(FindAll, OverlappingMatches) {
  const Bytes hay(10, 'a');
  const Bytes needle(3, 'a');
  const auto hits = find_all(hay, needle);
  ASSERT_EQ(hits.size(), 8u);
  for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i], i);
}

TEST(FindAll, EdgeCases) {
  const Bytes hay{1, 2, 3};
  EXPECT_TRUE(find_all(hay, Bytes{}).empty());
  EXPECT_TRUE(find_all(hay, Bytes{1, 2, 3, 4}).empty());
  EXPECT_EQ(find_all(hay, Bytes{1, 2, 3}), std::vector<std::size_t>{0});
  EXPECT_EQ(find_all(hay, Bytes{3}), std::vector<std::size_t>{2});
}

TEST(FindAll, MatchesNaiveSearchOnRandomData) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 300; ++round) {
    // small alphabets make matches frequent
    const unsigned alpha = 2 + rng() % 4;
    Bytes hay(1 + rng() % 2000), needle(1 + rng() % 9);
    for (auto& b : hay) b = static_cast<std::uint8_t>(rng() % alpha);
    for (auto& b : needle) b = static_cast<std::uint8_t>(rng() % alpha);
    ASSERT_EQ(find_all(hay, needle), testsupport::naive_find(hay, needle)) << "round " << round;
  }
}

TEST(Render, PrintableKeepsLineBreaks) {
  const std::string s = "GET / HTTP/1.1\r\n";
  Bytes b(s.begin(), s.end());
  b.push_back(0x00);
  b.push_back(0xff);
  EXPECT_EQ(printable(b), "GET / HTTP/1.1\r\n..");
}

TEST(Render, HexAsciiDumpLayout) {
  const std::string s = "HTTP/1.1 200 OK\r\nX";
  const std::string dump = hex_ascii_dump(as_bytes(s));
  EXPECT_EQ(dump,
            "00000000  48 54 54 50 2f 31 2e 31  20 32 30 30 20 4f 4b 0d  |HTTP/1.1 200 OK.|\n"
            "00000010  0a 58                                             |.X|\n");
  EXPECT_EQ(hex_ascii_dump(Bytes{}), "");
}

TEST(Files, WriteThenRead) {
  const auto dir = testsupport::temp_dir("bytes");
  Bytes data(70000);
  std::mt19937_64 rng(1);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  const auto path = (dir / "blob.bin").string();
  write_file(path, data);
  EXPECT_EQ(read_file(path), data);
  try {
    read_file((dir / "missing").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnreadableFile);
  }
  std::filesystem::remove_all(dir);
}
