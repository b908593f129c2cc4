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

// tlsmem: recover TLS 1.2 AES-GCM session keys from memory extracts and
// decrypt the matching capture.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tlsmem/capture.hpp"
#include "tlsmem/entropy.hpp"
#include "tlsmem/error.hpp"
#include "tlsmem/extracts.hpp"
#include "tlsmem/fixtures.hpp"
#include "tlsmem/pipeline.hpp"
#include "tlsmem/scan.hpp"

namespace {

using namespace tlsmem;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoValidDecrypt = 2;

struct ScanFlags {
  std::size_t key_size = 0;  // 0: from the capture (or 32 without one)
  std::optional<double> iv_entropy;
  std::optional<double> key_entropy;
  std::size_t max_iv_distance = 64;
  std::size_t max_key_distance = 128;
  std::size_t step = 4;
  std::size_t min_gap = 1000;
  unsigned jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--key-size", key_size, "Session key length in bytes (16 or 32)")
        ->check(CLI::IsMember({16, 32}));
    app->add_option("--iv-entropy", iv_entropy, "IV entropy gate (strict >), default 1.5");
    app->add_option("--key-entropy", key_entropy, "Key entropy gate (strict >), default 0.9*log2(key size)");
    app->add_option("--max-iv-distance", max_iv_distance, "Bytes after an IV marker to search")->capture_default_str();
    app->add_option("--max-key-distance", max_key_distance, "Bytes after a key marker to search")
        ->capture_default_str();
    app->add_option("--step", step, "Window stride for the marker scan")->capture_default_str();
    app->add_option("--min-gap", min_gap, "Minimum distance between kept key blocks")->capture_default_str();
    app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 256u));
  }

  ScanConfig config(std::size_t key_len) const {
    ScanConfig cfg = ScanConfig::for_key_length(key_len);
    if (iv_entropy) cfg.iv_entropy_threshold = *iv_entropy;
    if (key_entropy) cfg.key_entropy_threshold = *key_entropy;
    cfg.max_iv_distance = max_iv_distance;
    cfg.max_key_distance = max_key_distance;
    cfg.step = step;
    cfg.min_artefact_gap = min_gap;
    cfg.jobs = jobs;
    cfg.validate();
    return cfg;
  }
};

struct CaptureFlags {
  std::string path;
  std::string format = "auto";
  std::string filter;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--capture", path, "pcap file or directory with client.tls/server.tls");
    if (required) opt->required();
    app->add_option("--capture-format", format, "auto, pcap or raw")
        ->check(CLI::IsMember({"auto", "pcap", "raw"}))
        ->capture_default_str();
    app->add_option("--filter", filter, "Session endpoints as A.B.C.D:PORT,A.B.C.D:PORT (pcap only)");
  }

  SessionCapture load() const {
    CaptureFormat fmt = format == "pcap"  ? CaptureFormat::Pcap
                        : format == "raw" ? CaptureFormat::RawRecords
                                          : detect_capture_format(path);
    std::optional<SessionFilter> f;
    if (!filter.empty()) {
      const auto comma = filter.find(',');
      std::optional<TcpEndpoint> a, b;
      if (comma != std::string::npos) {
        a = parse_endpoint(std::string_view(filter).substr(0, comma));
        b = parse_endpoint(std::string_view(filter).substr(comma + 1));
      }
      if (!a || !b) throw Error(Errc::InvalidArgument, "bad --filter '" + filter + "'");
      f = SessionFilter{*a, *b};
    }
    return parse_capture(path, fmt, f);
  }
};

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw Error(Errc::UnreadableFile, "cannot write " + output);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string hex16(std::uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", v);
  return buf;
}

ordered_json capture_json(const SessionCapture& c) {
  ordered_json j;
  j["tls_version"] = hex16(c.handshake.tls_version);
  j["cipher_suite"] = hex16(c.handshake.cipher_suite);
  j["key_len_bytes"] = c.handshake.key_len_bytes;
  j["first_explicit_nonce"] = to_hex(c.first_explicit_nonce);
  j["nonce_style"] = explicit_nonce_style(c) == NonceStyle::CounterLike ? "CounterLike" : "RandomLike";
  ordered_json recs = ordered_json::array();
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& r = c.records[i];
    recs.push_back({{"index", i},
                    {"direction", direction_name(r.direction)},
                    {"content_type", static_cast<int>(r.content_type)},
                    {"seq", r.seq},
                    {"explicit_nonce", to_hex(r.explicit_nonce)},
                    {"ciphertext_len", r.ciphertext.size()}});
  }
  j["records"] = std::move(recs);
  return j;
}

ordered_json windows_scan_json(const WindowsScanResult& r) {
  ordered_json j;
  j["scanner"] = "windows";
  j["extracts_with_key_marker"] = r.extracts_with_key_marker;
  j["ssl3_markers"] = r.ssl3_markers_visited;
  j["mssk_markers"] = r.mssk_markers_visited;
  j["windows_evaluated"] = r.windows_evaluated;
  ordered_json keys = ordered_json::array(), ivs = ordered_json::array();
  for (const auto& k : r.keys)
    keys.push_back({{"extract", k.extract_id}, {"offset", k.offset}, {"entropy", k.entropy}, {"value", to_hex(k.value)}});
  for (const auto& v : r.ivs)
    ivs.push_back({{"extract", v.extract_id}, {"offset", v.offset}, {"entropy", v.entropy}, {"value", to_hex(v.value)}});
  j["keys"] = std::move(keys);
  j["ivs"] = std::move(ivs);
  return j;
}

ordered_json standard_scan_json(const StandardScanResult& r) {
  ordered_json j;
  j["scanner"] = "standard";
  j["nonce_hits"] = r.nonce_hits;
  j["iv_candidates"] = r.iv_candidates;
  j["distinct_ivs"] = r.distinct_ivs;
  j["key_blocks_before_pruning"] = r.blocks_before_pruning;
  ordered_json blocks = ordered_json::array();
  for (const auto& b : r.blocks)
    blocks.push_back({{"extract", b.extract_id},
                      {"offset", b.offset},
                      {"hypothesis", hypothesis_name(b.hypothesis)},
                      {"client_key", to_hex(b.client_key)},
                      {"server_key", to_hex(b.server_key)},
                      {"client_iv", to_hex(b.client_iv)},
                      {"server_iv", to_hex(b.server_iv)}});
  j["key_blocks"] = std::move(blocks);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover TLS 1.2 AES-GCM keys from memory extracts and decrypt the session"};
  app.require_subcommand(1);

  // decrypt
  auto* dec = app.add_subcommand("decrypt", "Scan extracts, trial-decrypt and print the session");
  std::string dec_extracts, dec_mode = "auto", dec_format = "json", dec_output;
  std::size_t seq_window = 2;
  bool omit_timings = false;
  ScanFlags dec_scan;
  CaptureFlags dec_cap;
  dec->add_option("--extracts", dec_extracts, "Directory of memory extracts")->required();
  dec_cap.add(dec, true);
  dec->add_option("--mode", dec_mode, "windows, standard or auto")
      ->check(CLI::IsMember({"windows", "standard", "auto"}))
      ->capture_default_str();
  dec_scan.add(dec);
  dec->add_option("--seq-window", seq_window, "Sequence numbers tried either side of the reconstructed one")
      ->capture_default_str();
  dec->add_option("--format", dec_format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  dec->add_option("--output,-o", dec_output, "Write the report here instead of stdout");
  dec->add_flag("--omit-timings", omit_timings, "Leave timings out of the JSON report");

  // scan
  auto* scan = app.add_subcommand("scan", "List candidate artefacts without decrypting");
  std::string scan_extracts, scan_mode = "windows", scan_output;
  ScanFlags scan_flags;
  CaptureFlags scan_cap;
  scan->add_option("--extracts", scan_extracts, "Directory of memory extracts")->required();
  scan->add_option("--mode", scan_mode, "windows or standard (standard needs --capture)")
      ->check(CLI::IsMember({"windows", "standard"}))
      ->capture_default_str();
  scan_cap.add(scan, false);
  scan_flags.add(scan);
  scan->add_option("--output,-o", scan_output, "Write JSON here instead of stdout");

  // parse-capture
  auto* pc = app.add_subcommand("parse-capture", "Summarise the encrypted records of a capture");
  CaptureFlags pc_cap;
  std::string pc_output;
  pc_cap.add(pc, true);
  pc->add_option("--output,-o", pc_output, "Write JSON here instead of stdout");

  // entropy-profile
  auto* ep = app.add_subcommand("entropy-profile", "Count high-entropy windows per region as CSV");
  std::string ep_extracts, ep_output;
  std::size_t ep_window = 32, ep_region = 0;
  std::optional<double> ep_threshold;
  ep->add_option("--extracts", ep_extracts, "Directory of memory extracts")->required();
  ep->add_option("--window", ep_window, "Window length in bytes")->capture_default_str()->check(CLI::PositiveNumber);
  ep->add_option("--threshold", ep_threshold, "Entropy threshold (strict >), default 0.9*log2(window)");
  ep->add_option("--region", ep_region, "Region size in bytes; 0 reports every window")->capture_default_str();
  ep->add_option("--output,-o", ep_output, "Write CSV here instead of stdout");

  // gen-fixture
  auto* gf = app.add_subcommand("gen-fixture", "Write a synthetic extract set and capture with ground truth");
  std::string gf_spec, gf_out;
  std::optional<std::uint64_t> gf_seed;
  gf->add_option("--spec", gf_spec, "Fixture spec JSON (defaults for missing fields)");
  gf->add_option("--out", gf_out, "Output directory")->required();
  gf->add_option("--seed", gf_seed, "Override rng_seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dec) {
      const SessionCapture capture = dec_cap.load();
      if (dec_scan.key_size != 0 && dec_scan.key_size != capture.handshake.key_len_bytes)
        throw Error(Errc::InvalidArgument, "--key-size " + std::to_string(dec_scan.key_size) +
                                               " contradicts the negotiated suite " +
                                               hex16(capture.handshake.cipher_suite));
      PipelineOptions opts;
      opts.mode = *parse_scan_mode(dec_mode);
      opts.scan = dec_scan.config(capture.handshake.key_len_bytes);
      opts.key_threshold_explicit = dec_scan.key_entropy.has_value();
      opts.seq_window = seq_window;
      opts.jobs = dec_scan.jobs;
      const RunReport report = run_pipeline(dec_extracts, capture, opts);
      if (dec_format == "json")
        emit(report_to_json(report, !omit_timings).dump(2), dec_output);
      else
        emit(report_to_text(report), dec_output);
      return report.outcome == Outcome::Validated ? kExitOk : kExitNoValidDecrypt;
    }

    if (*scan) {
      const ExtractSet extracts = load_extracts(scan_extracts);
      if (scan_mode == "windows") {
        const ScanConfig cfg = scan_flags.config(scan_flags.key_size ? scan_flags.key_size : 32);
        emit(windows_scan_json(scan_windows(extracts, cfg)).dump(2), scan_output);
      } else {
        if (scan_cap.path.empty()) throw Error(Errc::InvalidArgument, "standard scan needs --capture");
        const SessionCapture capture = scan_cap.load();
        const std::size_t key_len = scan_flags.key_size ? scan_flags.key_size : capture.handshake.key_len_bytes;
        emit(standard_scan_json(scan_standard(extracts, capture, scan_flags.config(key_len))).dump(2), scan_output);
      }
      return kExitOk;
    }

    if (*pc) {
      emit(capture_json(pc_cap.load()).dump(2), pc_output);
      return kExitOk;
    }

    if (*ep) {
      const ExtractSet extracts = load_extracts(ep_extracts);
      const double thr = ep_threshold ? *ep_threshold : default_key_entropy_threshold(ep_window);
      emit(profile_csv(extracts, ep_window, thr, ep_region), ep_output);
      return kExitOk;
    }

    if (*gf) {
      fixtures::FixtureSpec spec;
      if (!gf_spec.empty()) {
        const Bytes raw = read_file(gf_spec);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(raw.begin(), raw.end());
        } catch (const nlohmann::json::exception& e) {
          throw Error(Errc::SpecInvalid, gf_spec + ": " + e.what());
        }
        spec = fixtures::spec_from_json(j);
      }
      if (gf_seed) spec.rng_seed = *gf_seed;
      const auto paths = fixtures::generate_fixture(spec, gf_out);
      ordered_json j{{"root", paths.root},
                     {"extracts", paths.extracts_dir},
                     {"capture", paths.capture_dir},
                     {"groundtruth", paths.groundtruth}};
      emit(j.dump(2), "");
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "tlsmem: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "tlsmem: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
