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

#ifndef TLSMEM_PIPELINE_HPP
#define TLSMEM_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlsmem/capture.hpp"
#include "tlsmem/decryptor.hpp"
#include "tlsmem/extracts.hpp"
#include "tlsmem/scan.hpp"

namespace tlsmem {

enum class ScanMode { Windows, Standard, Auto };

std::string_view scan_mode_name(ScanMode m);
std::optional<ScanMode> parse_scan_mode(std::string_view text);

struct PipelineOptions {
  ScanMode mode = ScanMode::Auto;
  // key_len_bytes is taken from the capture; the key threshold follows it
  // unless key_threshold_explicit is set.
  ScanConfig scan;
  bool key_threshold_explicit = false;
  std::size_t seq_window = 2;
  unsigned jobs = 1;
};

// One scanner run plus its trial loop.
struct ScannerAttempt {
  std::string scanner;  // "windows" or "standard"
  std::size_t keys = 0;
  std::size_t ivs = 0;
  std::size_t pairs = 0;
  std::size_t key_blocks = 0;
  std::size_t key_blocks_before_pruning = 0;
  std::size_t nonce_hits = 0;
  std::size_t trials = 0;
  bool validated = false;
  double memory_analysis_secs = 0.0;
  double decrypt_analysis_secs = 0.0;
};

enum class Outcome { Validated, NoValidDecrypt };

struct RunReport {
  ScanMode mode = ScanMode::Auto;
  std::optional<std::string> winner;
  Outcome outcome = Outcome::NoValidDecrypt;
  HandshakeSummary handshake;
  NonceStyle nonce_style = NonceStyle::RandomLike;
  ExplicitNonce first_explicit_nonce{};
  std::size_t capture_records = 0;
  std::size_t extract_count = 0;
  std::size_t extract_bytes = 0;
  ScanConfig config;
  std::size_t seq_window = 2;
  std::vector<ScannerAttempt> attempts;
  std::size_t candidate_keys = 0;
  std::size_t candidate_ivs = 0;
  std::size_t candidate_key_blocks = 0;
  std::optional<TrialResult> trial;
  std::optional<BlockHypothesis> hypothesis;
  std::optional<DecryptedSession> session;
  double memory_analysis_secs = 0.0;
  double decrypt_analysis_secs = 0.0;
};

// Auto mode runs the marker scan first for counter-style explicit nonces and
// the key-block scan first otherwise, falling back to the other on failure.
RunReport run_pipeline(const ExtractSet& extracts, const SessionCapture& capture, const PipelineOptions& options);

// As above; extract loading counts toward memory-analysis time.
RunReport run_pipeline(const std::string& extracts_dir, const SessionCapture& capture,
                       const PipelineOptions& options);

// Timings (report-level and per attempt) are left out when
// `include_timings` is false so reports of identical runs compare equal.
nlohmann::ordered_json report_to_json(const RunReport& report, bool include_timings = true);

std::string report_to_text(const RunReport& report);

}  // namespace tlsmem

#endif  // TLSMEM_PIPELINE_HPP
