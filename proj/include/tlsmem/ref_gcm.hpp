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

#ifndef TLSMEM_REF_GCM_HPP
#define TLSMEM_REF_GCM_HPP

#include "tlsmem/bytes.hpp"

// Straightforward AES and GCM (NIST SP 800-38D) used only to fabricate
// fixtures. Deliberately shares nothing with the OpenSSL-backed decryptor so
// the two can check each other. Not constant time.
namespace tlsmem::ref {

// AES-128 or AES-256 single-block encryption. Throws BadKeyLength.
void aes_encrypt_block(ByteView key, const std::uint8_t in[16], std::uint8_t out[16]);

// Returns ciphertext || 16-byte tag. `nonce` must be 12 bytes.
Bytes aes_gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext);

}  // namespace tlsmem::ref

#endif  // TLSMEM_REF_GCM_HPP
