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
#include "tlsmem/decryptor.hpp"
#include "tlsmem/error.hpp"
#include "tlsmem/fixtures.hpp"
#include "tlsmem/ref_gcm.hpp"

using namespace tlsmem;

namespace {

struct GcmVector {
  const char* name;
  const char* key;
  const char* iv;
  const char* aad;
  const char* pt;
  const char* ct;
  const char* tag;
};

// McGrew & Viega GCM test cases 1, 2, 4, 13, 14, 16.
const GcmVector kVectors[] = {
    {"tc1", "00000000000000000000000000000000", "000000000000000000000000", "", "", "",
     "58e2fccefa7e3061367f1d57a4e7455a"},
    {"tc2", "00000000000000000000000000000000", "000000000000000000000000", "", "00000000000000000000000000000000",
     "0388dace60b6a392f328c2b971b2fe78", "ab6e47d42cec13bdf53a67b21257bddf"},
    {"tc4", "feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888", "feedfacedeadbeeffeedfacedeadbeefabaddad2",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de6"
     "57ba637b39",
     "42831ec2217774244b7221b784d0d49ce3aa212f2c02a4e035c17e2329aca12e21d514b25466931c7d8f6a5aac84aa051ba30b396a0aac"
     "973d58e091",
     "5bc94fbc3221a5db94fae95ae7121a47"},
    {"tc13", "0000000000000000000000000000000000000000000000000000000000000000", "000000000000000000000000", "", "",
     "", "530f8afbc74536b9a963b4f1c4cb738b"},
    {"tc14", "0000000000000000000000000000000000000000000000000000000000000000", "000000000000000000000000", "",
     "00000000000000000000000000000000", "cea7403d4d606b6e074ec5d3baf39d18", "d0d1c8a799996bf0265b98b5d48ab919"},
    {"tc16", "feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888",
     "feedfacedeadbeeffeedfacedeadbeefabaddad2",
     "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de6"
     "57ba637b39",
     "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b1056828838c5f61e6393ba7a"
     "0abcc9f662",
     "76fc6ece0f4e1768cddf8853bb2d551b"},
};

fixtures::Fixture small_fixture(std::size_t k = 32, std::uint64_t seed = 1) {
  fixtures::FixtureSpec spec;
  spec.key_len_bytes = k;
  spec.extract_sizes = {kMiB};
  spec.rng_seed = seed;
  return fixtures::build_fixture(spec);
}

Bytes random_bytes(std::size_t n, std::mt19937_64& rng) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

}  // namespace

TEST(AesBlock, Fips197Examples) {
  std::uint8_t out[16];
  const Bytes pt = from_hex("00112233445566778899aabbccddeeff");
  ref::aes_encrypt_block(from_hex("000102030405060708090a0b0c0d0e0f"), pt.data(), out);
  EXPECT_EQ(to_hex(ByteView(out, 16)), "69c4e0d86a7b0430d8cdb78070b4c55a");
  ref::aes_encrypt_block(from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"), pt.data(), out);
  EXPECT_EQ(to_hex(ByteView(out, 16)), "8ea2b7ca516745bfeafc49904b496089");
  EXPECT_THROW(ref::aes_encrypt_block(Bytes(24, 0), pt.data(), out), Error);
}

TEST(GcmVectors, ReferenceSeal) {
  for (const auto& v : kVectors) {
    const Bytes sealed = ref::aes_gcm_seal(from_hex(v.key), from_hex(v.iv), from_hex(v.aad), from_hex(v.pt));
    EXPECT_EQ(to_hex(sealed), std::string(v.ct) + v.tag) << v.name;
  }
}

TEST(GcmVectors, OpenSslOpen) {
  for (const auto& v : kVectors) {
    const Bytes sealed = from_hex(std::string(v.ct) + v.tag);
    const auto pt = gcm_open(from_hex(v.key), from_hex(v.iv), from_hex(v.aad), sealed);
    ASSERT_TRUE(pt.has_value()) << v.name;
    EXPECT_EQ(to_hex(*pt), v.pt) << v.name;
    Bytes bad = sealed;
    bad.back() ^= 1;
    EXPECT_FALSE(gcm_open(from_hex(v.key), from_hex(v.iv), from_hex(v.aad), bad).has_value()) << v.name;
  }
}

TEST(GcmRoutes, AgreeOnRandomInputs) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const Bytes key = random_bytes(i % 2 ? 16 : 32, rng);
    const Bytes nonce = random_bytes(12, rng);
    const Bytes aad = random_bytes(rng() % 40, rng);
    const Bytes pt = random_bytes(rng() % 300, rng);
    const Bytes sealed = ref::aes_gcm_seal(key, nonce, aad, pt);
    ASSERT_EQ(sealed.size(), pt.size() + 16);
    const auto back = gcm_open(key, nonce, aad, sealed);
    ASSERT_TRUE(back.has_value()) << i;
    ASSERT_EQ(*back, pt);
  }
}

TEST(ReferenceEncrypt, EmptyPlaintextIsTagOnly) {
  const Bytes key(16, 3);
  const auto rec = fixtures::reference_encrypt({}, key, ImplicitIv{1, 2, 3, 4}, be64_array(1), 1,
                                               ContentType::ApplicationData, kTls12);
  EXPECT_EQ(rec.ciphertext.size(), 16u);
  const auto pt = decrypt_record(rec, key, ImplicitIv{1, 2, 3, 4}, 1);
  ASSERT_TRUE(pt.has_value());
  EXPECT_TRUE(pt->empty());
  EXPECT_THROW(fixtures::reference_encrypt({}, Bytes(20, 0), ImplicitIv{}, ExplicitNonce{}, 0,
                                           ContentType::ApplicationData, kTls12),
               Error);
}

TEST(ReferenceEncrypt, RoundTripAcrossKeySizesAndSequenceNumbers) {
  std::mt19937_64 rng(31);
  for (std::size_t k : {16u, 32u}) {
    for (std::uint64_t seq : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{1} << 32}) {
      for (int i = 0; i < 20; ++i) {
        const Bytes key = random_bytes(k, rng);
        const auto iv = ImplicitIv{static_cast<std::uint8_t>(rng()), 9, 8, 7};
        const auto nonce = be64_array(rng());
        const Bytes pt = random_bytes(rng() % 2000, rng);
        const auto rec =
            fixtures::reference_encrypt(pt, key, iv, nonce, seq, ContentType::ApplicationData, kTls12);
        EXPECT_EQ(rec.explicit_nonce, nonce);
        const auto back = decrypt_record(rec, key, iv, seq);
        ASSERT_TRUE(back.has_value());
        ASSERT_EQ(*back, pt);
      }
    }
  }
}

TEST(DecryptRecord, FixtureRecordAndTamperedInputs) {
  const auto fx = small_fixture();
  const auto cap = fx.capture();
  const auto& rec = cap.records[*cap.first_app_data(Direction::ClientToServer)];
  const auto pt = decrypt_record(rec, fx.truth.client.key, fx.truth.client.iv, 1);
  ASSERT_TRUE(pt.has_value());
  EXPECT_EQ(*pt, fx.truth.plaintext_client);

  Bytes key = fx.truth.client.key;
  key[5] ^= 0x10;
  EXPECT_FALSE(decrypt_record(rec, key, fx.truth.client.iv, 1));
  EXPECT_FALSE(decrypt_record(rec, fx.truth.client.key, fx.truth.client.iv, 2));
  ImplicitIv iv = fx.truth.client.iv;
  iv[0] ^= 1;
  EXPECT_FALSE(decrypt_record(rec, fx.truth.client.key, iv, 1));
  auto altered = rec;
  altered.record_version = 0x0302;
  EXPECT_FALSE(decrypt_record(altered, fx.truth.client.key, fx.truth.client.iv, 1));
  altered = rec;
  altered.content_type = ContentType::Handshake;
  EXPECT_FALSE(decrypt_record(altered, fx.truth.client.key, fx.truth.client.iv, 1));
  altered = rec;
  altered.ciphertext[0] ^= 1;
  EXPECT_FALSE(decrypt_record(altered, fx.truth.client.key, fx.truth.client.iv, 1));

  try {
    decrypt_record(rec, Bytes(24, 0), fx.truth.client.iv, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadKeyLength);
  }
}

TEST(DecryptRecord, NoFalseAcceptsOverTenThousandWrongKeys) {
  const auto fx = small_fixture(16);
  const auto cap = fx.capture();
  const auto& rec = cap.records[*cap.first_app_data(Direction::ClientToServer)];
  std::mt19937_64 rng(1234);
  std::size_t accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    const Bytes key = random_bytes(16, rng);
    if (key == fx.truth.client.key) continue;
    accepted += decrypt_record(rec, key, fx.truth.client.iv, rec.seq).has_value();
  }
  EXPECT_EQ(accepted, 0u);
}

TEST(SeqCandidates, WindowShape) {
  EXPECT_EQ(seq_candidates(1, 2), (std::vector<std::uint64_t>{1, 0, 2, 3, 4}));
  EXPECT_EQ(seq_candidates(5, 2), (std::vector<std::uint64_t>{5, 4, 6, 3, 7}));
  EXPECT_EQ(seq_candidates(0, 1), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(seq_candidates(7, 0), (std::vector<std::uint64_t>{7}));
  for (std::uint64_t s : {0u, 1u, 2u, 3u, 100u})
    for (std::size_t w : {0u, 1u, 2u, 5u}) EXPECT_EQ(seq_candidates(s, w).size(), 2 * w + 1);
}

TEST(PlaintextValidation, HttpHeuristic) {
  EXPECT_TRUE(validate_plaintext(as_bytes("GET /images/iWjLmuDOy7/x.jpeg HTTP/1.1\r\nUser-Agent: Mozilla/4.0")));
  EXPECT_TRUE(validate_plaintext(as_bytes("POST /topic.php HTTP/1.1\r\nAccept: */*")));
  EXPECT_TRUE(validate_plaintext(as_bytes("HTTP/1.1 200 OK\r\n")));
  for (const char* m : {"HEAD", "PUT", "DELETE", "OPTIONS", "TRACE", "CONNECT", "PATCH"})
    EXPECT_TRUE(validate_plaintext(as_bytes(std::string(m) + " / HTTP/1.1"))) << m;
  EXPECT_FALSE(validate_plaintext(as_bytes("GETX / HTTP/1.1")));
  EXPECT_FALSE(validate_plaintext(as_bytes("get / HTTP/1.1")));
  EXPECT_FALSE(validate_plaintext(as_bytes("GET")));
  EXPECT_FALSE(validate_plaintext(as_bytes("HTTP/2 200")));
  EXPECT_FALSE(validate_plaintext(Bytes{}));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(validate_plaintext(random_bytes(16, rng)));
  const std::vector<PlaintextValidator> custom{[](ByteView p) { return !p.empty() && p[0] == 0x16; }};
  EXPECT_TRUE(validate_plaintext(Bytes{0x16, 0}, custom));
  EXPECT_FALSE(validate_plaintext(as_bytes("GET / HTTP/1.1"), custom));
}

// ---- trials ----

namespace {

std::vector<TrialPair> decoy_pairs(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<TrialPair> pairs(n);
  for (auto& p : pairs) {
    p.key.value = random_bytes(k, rng);
    for (auto& b : p.iv.value) b = static_cast<std::uint8_t>(rng());
  }
  return pairs;
}

TrialPair truth_pair(const KeyMaterial& m) {
  TrialPair p;
  p.key.value = m.key;
  p.iv.value = m.iv;
  return p;
}

}  // namespace

TEST(TrialDecrypt, WrongKeysExhaustWithExactTrialCount) {
  const auto fx = small_fixture();
  std::mt19937_64 rng(8);
  const auto pairs = decoy_pairs(37, 32, rng);
  for (std::size_t w : {0u, 1u, 2u, 3u}) {
    TrialOptions opts;
    opts.seq_window = w;
    const auto out = trial_decrypt(fx.capture(), pairs, opts);
    EXPECT_FALSE(out.validated());
    EXPECT_EQ(out.trials, pairs.size() * (2 * w + 1));
    EXPECT_GE(out.elapsed_secs, 0.0);
  }
}

TEST(TrialDecrypt, LastOfManyPairsWins) {
  const auto fx = small_fixture();
  std::mt19937_64 rng(9);
  auto pairs = decoy_pairs(2897, 32, rng);
  pairs.push_back(truth_pair(fx.truth.client));
  for (unsigned jobs : {1u, 4u}) {
    TrialOptions opts;
    opts.jobs = jobs;
    const auto out = trial_decrypt(fx.capture(), pairs, opts);
    ASSERT_TRUE(out.validated());
    EXPECT_EQ(out.result->candidate_index, 2897u);
    EXPECT_EQ(out.result->validation, Validation::TagAndProtocolValid);
    EXPECT_EQ(out.result->seq_used, 1u);
    EXPECT_EQ(out.result->plaintext, fx.truth.plaintext_client);
    EXPECT_EQ(out.trials, 2897u * 5 + 1);
    EXPECT_GT(out.elapsed_secs, 0.0);
  }
}

TEST(TrialDecrypt, LowestIndexWinsAndIsDeterministic) {
  const auto fx = small_fixture();
  std::mt19937_64 rng(10);
  auto pairs = decoy_pairs(200, 32, rng);
  pairs[57] = truth_pair(fx.truth.client);
  pairs[150] = truth_pair(fx.truth.client);
  TrialOptions serial, parallel;
  parallel.jobs = 8;
  const auto a = trial_decrypt(fx.capture(), pairs, serial);
  const auto b = trial_decrypt(fx.capture(), pairs, parallel);
  ASSERT_TRUE(a.validated());
  EXPECT_EQ(a.result->candidate_index, 57u);
  EXPECT_EQ(*a.result, *b.result);
  EXPECT_EQ(a.trials, b.trials);
}

TEST(TrialDecrypt, SequenceWindowAbsorbsOffset) {
  const auto fx = small_fixture();
  auto cap = fx.capture();
  const std::size_t idx = *cap.first_app_data(Direction::ClientToServer);
  cap.records[idx].seq = 3;  // as if two records were missing from the capture
  const std::vector<TrialPair> pairs{truth_pair(fx.truth.client)};
  TrialOptions opts;
  opts.seq_window = 1;
  EXPECT_FALSE(trial_decrypt(cap, pairs, opts).validated());
  opts.seq_window = 2;
  const auto out = trial_decrypt(cap, pairs, opts);
  ASSERT_TRUE(out.validated());
  EXPECT_EQ(out.result->seq_used, 1u);
  EXPECT_EQ(out.result->seq_offset(cap), -2);
  EXPECT_EQ(out.trials, 4u);  // 3, 2, 4, 1
}

TEST(TrialDecrypt, TagVerifiedWithoutHttp) {
  fixtures::FixtureSpec spec;
  spec.extract_sizes = {kMiB};
  spec.plaintext_client = "\x01\x02 binary C2 beacon";
  const auto fx = fixtures::build_fixture(spec);
  const auto out = trial_decrypt(fx.capture(), {truth_pair(fx.truth.client)});
  ASSERT_TRUE(out.validated());
  EXPECT_EQ(out.result->validation, Validation::TagVerified);
}

TEST(TrialDecrypt, Errors) {
  const auto fx = small_fixture();
  std::vector<TrialPair> pairs{truth_pair(fx.truth.client)};
  pairs[0].key.value.resize(20);
  try {
    trial_decrypt(fx.capture(), pairs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadKeyLength);
  }
  const auto empty = trial_decrypt(fx.capture(), {});
  EXPECT_FALSE(empty.validated());
  EXPECT_EQ(empty.trials, 0u);
}

TEST(TrialDecryptBlocks, OrientationFollowsPlanting) {
  const auto fx = small_fixture(16, 4);
  CandidateKeyBlock block;
  block.client_key = fx.truth.client.key;
  block.server_key = fx.truth.server.key;
  block.client_iv = fx.truth.client.iv;
  block.server_iv = fx.truth.server.iv;
  auto out = trial_decrypt_blocks(fx.capture(), {block});
  ASSERT_TRUE(out.validated());
  EXPECT_EQ(out.result->orientation, BlockOrientation::AsScanned);
  EXPECT_EQ(out.trials, 1u);

  CandidateKeyBlock swapped = block;
  std::swap(swapped.client_key, swapped.server_key);
  std::swap(swapped.client_iv, swapped.server_iv);
  out = trial_decrypt_blocks(fx.capture(), {swapped});
  ASSERT_TRUE(out.validated());
  EXPECT_EQ(out.result->orientation, BlockOrientation::Swapped);
  EXPECT_EQ(out.trials, 6u);  // 5 seqs on the first half, then the second half hits

  EXPECT_FALSE(trial_decrypt_blocks(fx.capture(), {}).validated());

  const auto session = decrypt_session(fx.capture(), *out.result, std::vector<CandidateKeyBlock>{swapped});
  EXPECT_FALSE(session.partial);
  ASSERT_EQ(session.transcript.size(), 2u);
  EXPECT_EQ(*session.transcript[0].plaintext, fx.truth.plaintext_client);
  EXPECT_EQ(*session.transcript[1].plaintext, fx.truth.plaintext_server);
}

TEST(DecryptSession, FullTruncatedAndClientOnly) {
  const auto fx = small_fixture();
  const auto cap = fx.capture();
  auto full = decrypt_session(cap, fx.truth.client, fx.truth.server);
  EXPECT_FALSE(full.partial);
  ASSERT_EQ(full.transcript.size(), 2u);
  EXPECT_EQ(full.transcript[0].direction, Direction::ClientToServer);
  EXPECT_EQ(full.transcript[1].direction, Direction::ServerToClient);
  EXPECT_EQ(*full.transcript[1].plaintext, fx.truth.plaintext_server);

  auto truncated = cap;
  truncated.records.pop_back();  // server response lost
  const auto prefix = decrypt_session(truncated, fx.truth.client, fx.truth.server);
  EXPECT_FALSE(prefix.partial);
  EXPECT_EQ(prefix.transcript.size(), 1u);

  const auto client_only = decrypt_session(cap, fx.truth.client, std::nullopt);
  EXPECT_TRUE(client_only.partial);
  EXPECT_TRUE(client_only.transcript[0].plaintext.has_value());
  EXPECT_FALSE(client_only.transcript[1].plaintext.has_value());
}

TEST(DecryptSession, PairContextFindsServerMaterial) {
  const auto fx = small_fixture();
  const auto cap = fx.capture();
  std::mt19937_64 rng(4);
  auto pairs = decoy_pairs(30, 32, rng);
  pairs.insert(pairs.begin() + 10, truth_pair(fx.truth.client));
  pairs.push_back(truth_pair(fx.truth.server));
  const auto out = trial_decrypt(cap, pairs);
  ASSERT_TRUE(out.validated());
  auto session = decrypt_session(cap, *out.result, pairs);
  EXPECT_FALSE(session.partial);
  ASSERT_TRUE(session.server.has_value());
  EXPECT_EQ(session.server->key, fx.truth.server.key);

  pairs.pop_back();
  session = decrypt_session(cap, *out.result, pairs);
  EXPECT_TRUE(session.partial);
  EXPECT_FALSE(session.server.has_value());
  ASSERT_EQ(session.transcript.size(), 2u);
  EXPECT_EQ(*session.transcript[0].plaintext, fx.truth.plaintext_client);
}

TEST(DecryptSession, AllRecordsOfAVerifiedDirectionDecrypt) {
  fixtures::FixtureSpec spec;
  spec.extract_sizes = {kMiB};
  const auto fx = fixtures::build_fixture(spec);
  auto cap = fx.capture();
  // append more client records sealed with the same material
  std::uint64_t seq = 2;
  for (int i = 0; i < 5; ++i, ++seq) {
    const std::string body = "GET /more/" + std::to_string(i) + " HTTP/1.1\r\n\r\n";
    cap.records.push_back(fixtures::reference_encrypt(as_bytes(body), fx.truth.client.key, fx.truth.client.iv,
                                                      be64_array(seq), seq, ContentType::ApplicationData, kTls12));
  }
  const auto session = decrypt_session(cap, fx.truth.client, fx.truth.server);
  EXPECT_FALSE(session.partial);
  for (const auto& e : session.transcript) EXPECT_TRUE(e.plaintext.has_value()) << e.record_index;
}
