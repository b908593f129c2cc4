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

#include "tlsmem/pipeline.hpp"

#include <chrono>
#include <cstdio>

#include "tlsmem/error.hpp"

namespace tlsmem {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct AttemptOutput {
  ScannerAttempt stats;
  std::optional<TrialResult> trial;
  std::optional<BlockHypothesis> hypothesis;
  std::optional<DecryptedSession> session;
};

AttemptOutput run_windows(const ExtractSet& extracts, const SessionCapture& capture, const ScanConfig& cfg,
                          const TrialOptions& trials) {
  AttemptOutput out;
  out.stats.scanner = "windows";
  auto t0 = Clock::now();
  const WindowsScanResult scan = scan_windows(extracts, cfg);
  out.stats.keys = scan.keys.size();
  out.stats.ivs = scan.ivs.size();
  std::vector<TrialPair> pairs;
  if (!scan.keys.empty() && !scan.ivs.empty()) pairs = pair_candidates(scan.keys, scan.ivs);
  out.stats.pairs = pairs.size();
  out.stats.memory_analysis_secs = since(t0);

  t0 = Clock::now();
  if (!pairs.empty()) {
    TrialOutcome outcome = trial_decrypt(capture, pairs, trials);
    out.stats.trials = outcome.trials;
    if (outcome.result) {
      out.session = decrypt_session(capture, *outcome.result, pairs, trials);
      out.trial = std::move(outcome.result);
      out.stats.validated = true;
    }
  }
  out.stats.decrypt_analysis_secs = since(t0);
  return out;
}

AttemptOutput run_standard(const ExtractSet& extracts, const SessionCapture& capture, const ScanConfig& cfg,
                           const TrialOptions& trials) {
  AttemptOutput out;
  out.stats.scanner = "standard";
  auto t0 = Clock::now();
  const StandardScanResult scan = scan_standard(extracts, capture, cfg);
  out.stats.key_blocks = scan.blocks.size();
  out.stats.key_blocks_before_pruning = scan.blocks_before_pruning;
  out.stats.nonce_hits = scan.nonce_hits;
  out.stats.ivs = scan.distinct_ivs;
  out.stats.memory_analysis_secs = since(t0);

  t0 = Clock::now();
  if (!scan.blocks.empty()) {
    TrialOutcome outcome = trial_decrypt_blocks(capture, scan.blocks, trials);
    out.stats.trials = outcome.trials;
    if (outcome.result) {
      out.hypothesis = scan.blocks[outcome.result->candidate_index].hypothesis;
      out.session = decrypt_session(capture, *outcome.result, scan.blocks);
      out.trial = std::move(outcome.result);
      out.stats.validated = true;
    }
  }
  out.stats.decrypt_analysis_secs = since(t0);
  return out;
}

std::string hex16(std::uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", v);
  return buf;
}

std::string_view nonce_style_name(NonceStyle s) {
  return s == NonceStyle::CounterLike ? "CounterLike" : "RandomLike";
}

}  // namespace

std::string_view scan_mode_name(ScanMode m) {
  switch (m) {
    case ScanMode::Windows: return "windows";
    case ScanMode::Standard: return "standard";
    case ScanMode::Auto: return "auto";
  }
  return "auto";
}

std::optional<ScanMode> parse_scan_mode(std::string_view text) {
  for (ScanMode m : {ScanMode::Windows, ScanMode::Standard, ScanMode::Auto})
    if (text == scan_mode_name(m)) return m;
  return std::nullopt;
}

RunReport run_pipeline(const ExtractSet& extracts, const SessionCapture& capture, const PipelineOptions& options) {
  ScanConfig cfg = options.scan;
  cfg.key_len_bytes = capture.handshake.key_len_bytes;
  if (!options.key_threshold_explicit) cfg.key_entropy_threshold = default_key_entropy_threshold(cfg.key_len_bytes);
  cfg.jobs = options.jobs;
  cfg.validate();

  TrialOptions trials;
  trials.seq_window = options.seq_window;
  trials.jobs = options.jobs;

  RunReport report;
  report.mode = options.mode;
  report.handshake = capture.handshake;
  report.nonce_style = explicit_nonce_style(capture, cfg.counter_nonce_bound);
  report.first_explicit_nonce = capture.first_explicit_nonce;
  report.capture_records = capture.records.size();
  report.extract_count = extracts.size();
  report.extract_bytes = extracts.total_bytes();
  report.config = cfg;
  report.seq_window = options.seq_window;

  std::vector<ScanMode> order;
  switch (options.mode) {
    case ScanMode::Windows: order = {ScanMode::Windows}; break;
    case ScanMode::Standard: order = {ScanMode::Standard}; break;
    case ScanMode::Auto:
      if (report.nonce_style == NonceStyle::CounterLike)
        order = {ScanMode::Windows, ScanMode::Standard};
      else
        order = {ScanMode::Standard, ScanMode::Windows};
      break;
  }

  for (ScanMode scanner : order) {
    AttemptOutput a = scanner == ScanMode::Windows ? run_windows(extracts, capture, cfg, trials)
                                                   : run_standard(extracts, capture, cfg, trials);
    report.memory_analysis_secs += a.stats.memory_analysis_secs;
    report.decrypt_analysis_secs += a.stats.decrypt_analysis_secs;
    if (scanner == ScanMode::Windows) {
      report.candidate_keys = a.stats.keys;
      report.candidate_ivs = a.stats.ivs;
    } else {
      report.candidate_key_blocks = a.stats.key_blocks;
    }
    const bool won = a.stats.validated;
    report.attempts.push_back(std::move(a.stats));
    if (won) {
      report.outcome = Outcome::Validated;
      report.winner = std::string(scan_mode_name(scanner));
      report.trial = std::move(a.trial);
      report.hypothesis = a.hypothesis;
      report.session = std::move(a.session);
      break;
    }
  }
  return report;
}

RunReport run_pipeline(const std::string& extracts_dir, const SessionCapture& capture,
                       const PipelineOptions& options) {
  const auto t0 = Clock::now();
  const ExtractSet extracts = load_extracts(extracts_dir);
  const double load_secs = since(t0);
  RunReport report = run_pipeline(extracts, capture, options);
  report.memory_analysis_secs += load_secs;
  return report;
}

nlohmann::ordered_json report_to_json(const RunReport& r, bool include_timings) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tool"] = "tlsmem";
  j["mode"] = scan_mode_name(r.mode);
  j["outcome"] = r.outcome == Outcome::Validated ? "validated" : "no_valid_decrypt";
  j["winner"] = r.winner ? ordered_json(*r.winner) : ordered_json(nullptr);
  j["capture"] = {{"cipher_suite", hex16(r.handshake.cipher_suite)},
                  {"key_len_bytes", r.handshake.key_len_bytes},
                  {"nonce_style", nonce_style_name(r.nonce_style)},
                  {"first_explicit_nonce", to_hex(r.first_explicit_nonce)},
                  {"encrypted_records", r.capture_records}};
  j["extracts"] = {{"count", r.extract_count}, {"total_bytes", r.extract_bytes}};
  j["config"] = {{"key_len_bytes", r.config.key_len_bytes},
                 {"iv_entropy_threshold", r.config.iv_entropy_threshold},
                 {"key_entropy_threshold", r.config.key_entropy_threshold},
                 {"max_iv_distance", r.config.max_iv_distance},
                 {"max_key_distance", r.config.max_key_distance},
                 {"step", r.config.step},
                 {"min_artefact_gap", r.config.min_artefact_gap},
                 {"counter_nonce_bound", r.config.counter_nonce_bound},
                 {"seq_window", r.seq_window}};
  j["candidates"] = {{"keys", r.candidate_keys}, {"ivs", r.candidate_ivs}, {"key_blocks", r.candidate_key_blocks}};

  ordered_json attempts = ordered_json::array();
  for (const auto& a : r.attempts) {
    ordered_json aj;
    aj["scanner"] = a.scanner;
    if (a.scanner == "windows") {
      aj["keys"] = a.keys;
      aj["ivs"] = a.ivs;
      aj["pairs"] = a.pairs;
    } else {
      aj["nonce_hits"] = a.nonce_hits;
      aj["distinct_ivs"] = a.ivs;
      aj["key_blocks_before_pruning"] = a.key_blocks_before_pruning;
      aj["key_blocks"] = a.key_blocks;
    }
    aj["trials"] = a.trials;
    aj["validated"] = a.validated;
    if (include_timings) {
      aj["memory_analysis_secs"] = a.memory_analysis_secs;
      aj["decrypt_analysis_secs"] = a.decrypt_analysis_secs;
    }
    attempts.push_back(std::move(aj));
  }
  j["attempts"] = std::move(attempts);

  if (r.trial) {
    const auto& t = *r.trial;
    ordered_json art;
    art["client_key"] = to_hex(t.key);
    art["client_iv"] = to_hex(t.implicit_iv);
    const bool server_known = r.session && r.session->server;
    art["server_key"] = server_known ? ordered_json(to_hex(r.session->server->key)) : ordered_json(nullptr);
    art["server_iv"] = server_known ? ordered_json(to_hex(r.session->server->iv)) : ordered_json(nullptr);
    art["hypothesis"] = r.hypothesis ? ordered_json(hypothesis_name(*r.hypothesis)) : ordered_json(nullptr);
    art["orientation"] = t.orientation
                             ? ordered_json(*t.orientation == BlockOrientation::AsScanned ? "as_scanned" : "swapped")
                             : ordered_json(nullptr);
    art["validation"] = validation_name(t.validation);
    art["record_index"] = t.record_index;
    art["seq_used"] = t.seq_used;
    art["candidate_index"] = t.candidate_index;
    j["artefacts"] = std::move(art);
  } else {
    j["artefacts"] = nullptr;
  }

  ordered_json transcript = ordered_json::array();
  if (r.session) {
    for (const auto& e : r.session->transcript) {
      ordered_json ej;
      ej["direction"] = direction_name(e.direction);
      ej["seq"] = e.seq;
      ej["record_index"] = e.record_index;
      ej["ok"] = e.plaintext.has_value();
      ej["hex"] = e.plaintext ? ordered_json(to_hex(*e.plaintext)) : ordered_json(nullptr);
      ej["text"] = e.plaintext ? ordered_json(printable(*e.plaintext)) : ordered_json(nullptr);
      transcript.push_back(std::move(ej));
    }
  }
  j["transcript"] = std::move(transcript);
  j["partial"] = r.session ? r.session->partial : false;
  if (include_timings)
    j["timings"] = {{"memory_analysis_secs", r.memory_analysis_secs},
                    {"decrypt_analysis_secs", r.decrypt_analysis_secs}};
  return j;
}

std::string report_to_text(const RunReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "mode: %s  outcome: %s  winner: %s\n", std::string(scan_mode_name(r.mode)).c_str(),
                r.outcome == Outcome::Validated ? "validated" : "no valid decrypt",
                r.winner ? r.winner->c_str() : "-");
  out += line;
  std::snprintf(line, sizeof line, "cipher suite %s (AES-%zu-GCM), first explicit nonce %s (%s)\n",
                hex16(r.handshake.cipher_suite).c_str(), r.handshake.key_len_bytes * 8,
                to_hex(r.first_explicit_nonce).c_str(), std::string(nonce_style_name(r.nonce_style)).c_str());
  out += line;
  std::snprintf(line, sizeof line, "extracts: %zu files, %zu bytes\n", r.extract_count, r.extract_bytes);
  out += line;
  for (const auto& a : r.attempts) {
    if (a.scanner == "windows")
      std::snprintf(line, sizeof line, "  windows scan: %zu keys, %zu IVs, %zu pairs, %zu trials%s\n", a.keys, a.ivs,
                    a.pairs, a.trials, a.validated ? " -> validated" : "");
    else
      std::snprintf(line, sizeof line,
                    "  standard scan: %zu nonce hits, %zu IVs, %zu key blocks (%zu before pruning), %zu trials%s\n",
                    a.nonce_hits, a.ivs, a.key_blocks, a.key_blocks_before_pruning, a.trials,
                    a.validated ? " -> validated" : "");
    out += line;
  }
  std::snprintf(line, sizeof line, "memory analysis %.3f s, decrypt analysis %.3f s\n", r.memory_analysis_secs,
                r.decrypt_analysis_secs);
  out += line;
  if (r.trial) {
    out += "client key " + to_hex(r.trial->key) + "  iv " + to_hex(r.trial->implicit_iv) + "\n";
    if (r.session && r.session->server)
      out += "server key " + to_hex(r.session->server->key) + "  iv " + to_hex(r.session->server->iv) + "\n";
  }
  if (r.session) {
    for (const auto& e : r.session->transcript) {
      std::snprintf(line, sizeof line, "\n[%s seq %llu]%s\n", std::string(direction_name(e.direction)).c_str(),
                    static_cast<unsigned long long>(e.seq), e.plaintext ? "" : " <not decrypted>");
      out += line;
      if (e.plaintext) out += hex_ascii_dump(*e.plaintext);
    }
  }
  return out;
}

}  // namespace tlsmem
