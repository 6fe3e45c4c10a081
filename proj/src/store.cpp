#include "hotspot/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hotspot/digest.hpp"
#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const fs::path& p, const std::string& bytes) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << bytes;
    if (!out.flush()) throw StoreError("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

json entry_json(const StoreEntry& e) {
  return {{"id", e.id},           {"kind", e.kind},       {"sha256", e.sha256},
          {"config_hash", e.config_hash}, {"created", e.created}, {"meta", e.meta}};
}

StoreEntry entry_from(const json& j) {
  StoreEntry e;
  e.id = j.at("id").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  e.sha256 = j.at("sha256").get<std::string>();
  e.config_hash = j.at("config_hash").get<std::string>();
  e.created = j.at("created").get<std::string>();
  e.meta = j.at("meta").get<std::map<std::string, std::string>>();
  return e;
}

}  // namespace

std::string StoreEntry::manifest_line() const {
  return "id=" + id + " kind=" + kind + " sha256=" + sha256 + " config_hash=" + config_hash;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

StoreLock::StoreLock(const std::string& root, Mode mode) {
  fd_ = ::open((fs::path(root) / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StoreError("cannot open store lock in " + root + ": " + std::strerror(errno));
  int rc;
  do {
    rc = ::flock(fd_, mode == Mode::shared ? LOCK_SH : LOCK_EX);
  } while (rc != 0 && errno == EINTR);
  if (rc != 0) {
    ::close(fd_);
    throw StoreError("cannot lock store " + root + ": " + std::strerror(errno));
  }
}

std::optional<StoreLock> StoreLock::try_acquire(const std::string& root, Mode mode) {
  StoreLock lock;
  lock.fd_ = ::open((fs::path(root) / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock.fd_ < 0) throw StoreError("cannot open store lock in " + root + ": " + std::strerror(errno));
  if (::flock(lock.fd_, (mode == Mode::shared ? LOCK_SH : LOCK_EX) | LOCK_NB) != 0) {
    if (errno == EWOULDBLOCK) return std::nullopt;
    throw StoreError("cannot lock store " + root + ": " + std::strerror(errno));
  }
  return std::optional<StoreLock>(std::move(lock));
}

StoreLock::StoreLock(StoreLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

StoreLock::~StoreLock() {
  if (fd_ >= 0) ::close(fd_);
}

ArtifactStore::ArtifactStore(std::string root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(fs::path(root_) / "objects", ec);
  if (ec) throw StoreError("cannot create store at " + root_ + ": " + ec.message());
  StoreLock lock(root_, StoreLock::Mode::exclusive);
  if (!fs::exists(fs::path(root_) / "manifest.json")) write_manifest({});
}

std::vector<StoreEntry> ArtifactStore::read_manifest() const {
  const std::string text = read_file(fs::path(root_) / "manifest.json");
  try {
    const json j = json::parse(text);
    std::vector<StoreEntry> out;
    for (const auto& e : j.at("entries")) out.push_back(entry_from(e));
    return out;
  } catch (const json::exception& e) {
    throw StoreError("store manifest in " + root_ + " is corrupt: " + e.what());
  }
}

void ArtifactStore::write_manifest(const std::vector<StoreEntry>& entries) const {
  json list = json::array();
  for (const auto& e : entries) list.push_back(entry_json(e));
  write_file_atomic(fs::path(root_) / "manifest.json", json{{"version", 1}, {"entries", list}}.dump(1) + "\n");
}

std::string ArtifactStore::object_path(const StoreEntry& entry) const {
  return (fs::path(root_) / "objects" / entry.sha256).string();
}

StoreEntry ArtifactStore::put(const std::string& kind, const std::string& bytes, const std::string& config_hash,
                              const std::map<std::string, std::string>& meta) {
  if (kind.empty()) throw ArgumentError("store: empty artifact kind");
  StoreEntry e;
  e.kind = kind;
  e.sha256 = sha256_hex(bytes);
  e.config_hash = config_hash;
  e.id = kind + "-" + sha256_hex(kind + "\n" + config_hash + "\n" + e.sha256).substr(0, 16);
  e.meta = meta;

  StoreLock lock(root_, StoreLock::Mode::exclusive);
  auto entries = read_manifest();
  for (const auto& old : entries) {
    if (old.id == e.id) return old;
  }
  const fs::path obj = object_path(e);
  if (!fs::exists(obj) || sha256_hex(read_file(obj)) != e.sha256) write_file_atomic(obj, bytes);
  e.created = utc_timestamp();
  entries.push_back(e);
  write_manifest(entries);
  return e;
}

std::optional<StoreEntry> ArtifactStore::entry(const std::string& id) const {
  StoreLock lock(root_, StoreLock::Mode::shared);
  for (const auto& e : read_manifest()) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

std::string ArtifactStore::get(const std::string& id) const {
  const auto e = entry(id);
  if (!e) throw NotFoundError("unknown artifact " + id);
  std::string bytes;
  {
    StoreLock lock(root_, StoreLock::Mode::shared);
    bytes = read_file(object_path(*e));
  }
  if (sha256_hex(bytes) != e->sha256) throw StoreError("artifact " + id + " does not match its recorded hash");
  return bytes;
}

std::vector<StoreEntry> ArtifactStore::list(const std::string& kind) const {
  StoreLock lock(root_, StoreLock::Mode::shared);
  std::vector<StoreEntry> out;
  for (auto& e : read_manifest()) {
    if (kind.empty() || e.kind == kind) out.push_back(std::move(e));
  }
  return out;
}

std::optional<StoreEntry> ArtifactStore::find(const std::string& kind,
                                              const std::map<std::string, std::string>& match) const {
  const auto entries = list(kind);
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    bool ok = true;
    for (const auto& [k, v] : match) {
      const auto m = it->meta.find(k);
      if (m == it->meta.end() || m->second != v) {
        ok = false;
        break;
      }
    }
    if (ok) return *it;
  }
  return std::nullopt;
}

}  // namespace hotspot
