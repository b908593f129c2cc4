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

#include "tlsmem/ref_gcm.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "tlsmem/error.hpp"

namespace tlsmem::ref {

namespace {

constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

std::uint8_t xtime(std::uint8_t x) { return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0)); }

// Round keys as 4*(Nr+1) words of 4 bytes.
class KeySchedule {
 public:
  explicit KeySchedule(ByteView key) {
    if (key.size() != 16 && key.size() != 32)
      throw Error(Errc::BadKeyLength, "AES key must be 16 or 32 bytes");
    const std::size_t nk = key.size() / 4;
    rounds_ = nk + 6;
    const std::size_t total = 4 * (rounds_ + 1);
    std::memcpy(w_.data(), key.data(), key.size());
    std::uint8_t rcon = 1;
    for (std::size_t i = nk; i < total; ++i) {
      std::array<std::uint8_t, 4> t;
      std::memcpy(t.data(), &w_[4 * (i - 1)], 4);
      if (i % nk == 0) {
        t = {static_cast<std::uint8_t>(kSbox[t[1]] ^ rcon), kSbox[t[2]], kSbox[t[3]], kSbox[t[0]]};
        rcon = xtime(rcon);
      } else if (nk > 6 && i % nk == 4) {
        for (auto& b : t) b = kSbox[b];
      }
      for (std::size_t j = 0; j < 4; ++j) w_[4 * i + j] = w_[4 * (i - nk) + j] ^ t[j];
    }
  }

  void encrypt(const std::uint8_t in[16], std::uint8_t out[16]) const {
    std::uint8_t s[16];
    for (int i = 0; i < 16; ++i) s[i] = in[i] ^ w_[i];
    for (std::size_t round = 1; round <= rounds_; ++round) {
      for (auto& b : s) b = kSbox[b];
      // ShiftRows; state byte (row r, column c) lives at s[4c + r]
      std::uint8_t t[16];
      for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) t[4 * c + r] = s[4 * ((c + r) % 4) + r];
      if (round != rounds_) {
        for (int c = 0; c < 4; ++c) {
          std::uint8_t* col = t + 4 * c;
          const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
          const std::uint8_t all = a0 ^ a1 ^ a2 ^ a3;
          col[0] = a0 ^ all ^ xtime(a0 ^ a1);
          col[1] = a1 ^ all ^ xtime(a1 ^ a2);
          col[2] = a2 ^ all ^ xtime(a2 ^ a3);
          col[3] = a3 ^ all ^ xtime(a3 ^ a0);
        }
      }
      for (int i = 0; i < 16; ++i) s[i] = t[i] ^ w_[16 * round + i];
    }
    std::memcpy(out, s, 16);
  }

 private:
  std::array<std::uint8_t, 240> w_{};
  std::size_t rounds_ = 0;
};

struct Block128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
};

Block128 load_block(const std::uint8_t* p) { return {load_be64(p), load_be64(p + 8)}; }

// Bitwise multiplication in GF(2^128) with the GCM bit order.
Block128 gf_mul(Block128 x, Block128 y) {
  Block128 z, v = y;
  for (int i = 0; i < 128; ++i) {
    const std::uint64_t word = i < 64 ? x.hi : x.lo;
    if ((word >> (63 - (i % 64))) & 1) {
      z.hi ^= v.hi;
      z.lo ^= v.lo;
    }
    const bool lsb = v.lo & 1;
    v.lo = (v.lo >> 1) | (v.hi << 63);
    v.hi >>= 1;
    if (lsb) v.hi ^= 0xe100000000000000ULL;
  }
  return z;
}

class Ghash {
 public:
  explicit Ghash(Block128 h) : h_(h) {}

  void absorb_padded(ByteView data) {
    for (std::size_t off = 0; off < data.size(); off += 16) {
      std::uint8_t block[16] = {};
      std::memcpy(block, data.data() + off, std::min<std::size_t>(16, data.size() - off));
      absorb(load_block(block));
    }
  }
  void absorb(Block128 b) {
    y_.hi ^= b.hi;
    y_.lo ^= b.lo;
    y_ = gf_mul(y_, h_);
  }
  Block128 value() const { return y_; }

 private:
  Block128 h_;
  Block128 y_;
};

void inc32(std::uint8_t counter[16]) {
  for (int i = 15; i >= 12; --i)
    if (++counter[i] != 0) break;
}

}  // namespace

void aes_encrypt_block(ByteView key, const std::uint8_t in[16], std::uint8_t out[16]) {
  KeySchedule(key).encrypt(in, out);
}

Bytes aes_gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext) {
  if (nonce.size() != 12) throw Error(Errc::InvalidArgument, "reference GCM supports 12-byte nonces only");
  const KeySchedule ks(key);
  std::uint8_t zero[16] = {}, h[16];
  ks.encrypt(zero, h);

  std::uint8_t j0[16] = {};
  std::memcpy(j0, nonce.data(), 12);
  j0[15] = 1;

  Bytes out(plaintext.size() + 16);
  std::uint8_t counter[16], stream[16];
  std::memcpy(counter, j0, 16);
  for (std::size_t off = 0; off < plaintext.size(); off += 16) {
    inc32(counter);
    ks.encrypt(counter, stream);
    const std::size_t n = std::min<std::size_t>(16, plaintext.size() - off);
    for (std::size_t i = 0; i < n; ++i) out[off + i] = plaintext[off + i] ^ stream[i];
  }

  Ghash gh(load_block(h));
  gh.absorb_padded(aad);
  gh.absorb_padded(ByteView(out.data(), plaintext.size()));
  gh.absorb({std::uint64_t{aad.size()} * 8, std::uint64_t{plaintext.size()} * 8});
  const Block128 s = gh.value();

  std::uint8_t ek_j0[16];
  ks.encrypt(j0, ek_j0);
  for (int i = 0; i < 8; ++i) {
    out[plaintext.size() + i] = ek_j0[i] ^ static_cast<std::uint8_t>(s.hi >> (56 - 8 * i));
    out[plaintext.size() + 8 + i] = ek_j0[8 + i] ^ static_cast<std::uint8_t>(s.lo >> (56 - 8 * i));
  }
  return out;
}

}  // namespace tlsmem::ref
