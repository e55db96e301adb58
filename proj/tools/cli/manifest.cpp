#include "cli/manifest.hpp"

#include <filesystem>
#include <iterator>
#include <nlohmann/json.hpp>

#include "tbcv/error.hpp"
#include "tbcv/version.hpp"

namespace tbcv::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail(ErrorKind::Config, std::string("manifest: bad ") + what);
  return v;
}

}  // namespace

ArtifactSet::ArtifactSet(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) fail(ErrorKind::Io, "cannot create output directory '" + dir_ + "'");
}

std::ofstream ArtifactSet::open(const std::string& name, bool binary) {
  const auto path = (fs::path(dir_) / name).string();
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!os) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  names_.push_back(name);
  return os;
}

void ArtifactSet::close(std::ofstream& os, const std::string& name) const {
  os.flush();
  const bool ok = static_cast<bool>(os);
  os.close();
  if (!ok || os.fail()) fail(ErrorKind::Io, "write failed for '" + name + "' in '" + dir_ + "'");
}

std::vector<Artifact> ArtifactSet::hashes() const {
  std::vector<Artifact> out;
  for (const auto& n : names_) out.push_back(hash_file(dir_, n));
  return out;
}

Artifact hash_file(const std::string& dir, const std::string& name) {
  const auto path = (fs::path(dir) / name).string();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {name, bytes.size(), hex64(fnv1a64(bytes))};
}

std::string compiler_id() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

void write_manifest(const RunConfig& rc, const std::vector<Artifact>& artifacts) {
  Json j;
  j["format"] = "tbcv-manifest-1";
  j["version"] = kVersion;
  j["compiler"] = compiler_id();
  j["command"] = mode_id(rc.mode);
  j["target"] = rc.target ? target_id(*rc.target) : "";
  j["seed"] = std::to_string(rc.seed);
  j["threads"] = rc.threads;
  Json cfg = Json::object();
  for (const auto& [k, v] : rc.source.entries()) cfg[k] = v;
  j["config"] = cfg;
  j["config_hash"] = "fnv1a64:" + hex64(fnv1a64(rc.source.canonical()));
  Json arts = Json::array();
  for (const auto& a : artifacts) {
    arts.push_back({{"path", a.path}, {"bytes", a.bytes}, {"fnv1a64", a.fnv1a64}});
  }
  j["artifacts"] = arts;
  const auto path = (fs::path(rc.out_dir) / "manifest.json").string();
  std::ofstream os(path, std::ios::trunc);
  os << j.dump(2) << '\n';
  os.flush();
  if (!os) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
    Manifest m;
    if (j.at("format").get<std::string>() != "tbcv-manifest-1") {
      fail(ErrorKind::Config, "manifest: unsupported format");
    }
    m.mode = parse_mode(j.at("command").get<std::string>());
    const auto target = j.at("target").get<std::string>();
    if (!target.empty()) m.target = parse_target(target);
    for (const auto& [k, v] : j.at("config").items()) m.config[k] = v.get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = parse_u64(j.at("seed").get<std::string>(), "seed");
    m.threads = j.at("threads").get<int>();
    m.version = j.at("version").get<std::string>();
    for (const auto& a : j.at("artifacts")) {
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("bytes").get<std::uint64_t>(),
                             a.at("fnv1a64").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, "manifest '" + path + "': " + e.what());
  }
}

}  // namespace tbcv::cli
