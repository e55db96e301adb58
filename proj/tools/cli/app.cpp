#include "cli/app.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <ostream>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "cli/run_config.hpp"
#include "tbcv/version.hpp"

namespace tbcv::cli {
namespace {

void diagnose(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["exit_code"] = code;
  j["kind"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir = "tbcv_output";
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value configuration file");
  sub->add_option("--set", c.overrides, "override one key, KEY=VALUE (repeatable)");
  sub->add_option("--seed", c.seed, "64-bit seed of every random stream");
  sub->add_option("--out", c.out_dir, "output directory");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1, 1024));
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

KeyValueConfig gather(const Common& c, bool required) {
  KeyValueConfig kv;
  if (!c.config_path.empty()) {
    kv = KeyValueConfig::load(c.config_path);
  }
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + o + "'");
    kv.set(o.substr(0, eq), o.substr(eq + 1));
  }
  if (kv.empty() && (required || !c.config_path.empty())) {
    throw UsageError(c.config_path.empty() ? "no configuration given (use --config PATH)"
                                           : "configuration '" + c.config_path + "' is empty");
  }
  return kv;
}

int replay(const std::string& manifest_path, const std::string& out_dir, int threads, std::ostream& out) {
  const auto m = read_manifest(manifest_path);
  const auto kv = KeyValueConfig::from_entries(m.config);
  if ("fnv1a64:" + hex64(fnv1a64(kv.canonical())) != m.config_hash) {
    fail(ErrorKind::Inconsistent, "manifest config hash does not match its config");
  }
  if (m.version != kVersion) {
    out << "note: manifest written by version " << m.version << ", replaying with " << kVersion << '\n';
  }
  const auto rc = build_run_config(m.mode, m.target, kv, m.seed, threads > 0 ? threads : m.threads, out_dir);
  const auto produced = run(rc, out);
  int mismatched = 0;
  for (const auto& a : m.artifacts) {
    const Artifact* now = nullptr;
    for (const auto& p : produced) {
      if (p.path == a.path) now = &p;
    }
    const bool same = now && now->fnv1a64 == a.fnv1a64 && now->bytes == a.bytes;
    mismatched += !same;
    out << (same ? "match    " : "MISMATCH ") << a.path << " " << a.fnv1a64 << '\n';
  }
  if (produced.size() != m.artifacts.size()) ++mismatched;
  if (mismatched) fail(ErrorKind::Inconsistent, "replay produced different artifacts");
  out << "replay: all " << m.artifacts.size() << " artifacts reproduced bit-exactly\n";
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Domain:
    case ErrorKind::Unsupported:
    case ErrorKind::Io:
      return kExitConfig;
    case ErrorKind::Numeric:
    case ErrorKind::UndefinedRate:
    case ErrorKind::Inconsistent:
    case ErrorKind::Budget:
    case ErrorKind::OrderOverflow:
      return kExitNumeric;
  }
  return kExitNumeric;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-bin CV QKD key-rate, decoy, tomography and finite-size harness", "tbcv"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  struct Sub {
    Mode mode;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  const std::pair<Mode, const char*> modes[] = {
      {Mode::Sweep, "Key rate at fixed parameters over distance"},
      {Mode::Optimize, "Grid optimum of the chosen objective per distance"},
      {Mode::DecoyCompare, "Decoy LP bounds and rate against the infinite-decoy values"},
      {Mode::TomoVerify, "Homodyne tomography estimates against closed-form expectations"},
      {Mode::FiniteSize, "Simulated rounds, certified tag bounds and finite key length"},
      {Mode::Simulate, "Stream simulated protocol rounds to CSV or binary"},
      {Mode::Reproduce, "Regenerate a figure or table as plot-ready CSV"},
  };
  std::string target;
  for (const auto& [mode, help] : modes) {
    auto* sub = app.add_subcommand(mode_id(mode), help);
    add_common(sub, common);
    if (mode == Mode::Reproduce) {
      sub->add_option("--target", target, "figure or table")->required()->check(CLI::IsMember(target_ids()));
    }
    subs.push_back({mode, sub});
  }
  std::string manifest_path, replay_out;
  int replay_threads = 0;
  auto* replay_cmd = app.add_subcommand("replay", "Rerun a manifest and verify artifact hashes");
  replay_cmd->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay_cmd->add_option("--out", replay_out, "output directory for the rerun")->required();
  replay_cmd->add_option("--threads", replay_threads, "worker threads (default: as recorded)")
      ->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    diagnose(err, kExitConfig, "usage", e.what());
    err << app.help();
    return kExitConfig;
  }

  try {
    if (replay_cmd->parsed()) return replay(manifest_path, replay_out, replay_threads, out);
    for (const auto& s : subs) {
      if (!s.app->parsed()) continue;
      const bool required = s.mode != Mode::Reproduce;
      const auto kv = gather(common, required);
      const std::optional<Target> t = s.mode == Mode::Reproduce ? std::optional(parse_target(target)) : std::nullopt;
      const auto rc = build_run_config(s.mode, t, kv, common.seed, common.threads, common.out_dir);
      const auto artifacts = run(rc, out);
      out << "wrote " << artifacts.size() << " artifacts and manifest.json to " << rc.out_dir << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    diagnose(err, kExitConfig, "usage", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    diagnose(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const std::exception& e) {
    diagnose(err, kExitNumeric, "internal", e.what());
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace tbcv::cli
