#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hotspot {

struct StoreEntry {
  std::string id;
  std::string kind;  // dataset, config, model, summary, forecast, intel, metrics, ...
  std::string sha256;
  std::string config_hash;
  std::string created;  // UTC, ISO 8601
  std::map<std::string, std::string> meta;

  // "id=... kind=... sha256=... config_hash=..." as printed by the CLI.
  std::string manifest_line() const;
};

// flock(2) on <root>/.lock. Shared for readers, exclusive for writers.
class StoreLock {
 public:
  enum class Mode { shared, exclusive };

  StoreLock(const std::string& root, Mode mode);  // blocks
  static std::optional<StoreLock> try_acquire(const std::string& root, Mode mode);
  StoreLock(StoreLock&& other) noexcept;
  StoreLock& operator=(StoreLock&&) = delete;
  StoreLock(const StoreLock&) = delete;
  ~StoreLock();

 private:
  StoreLock() = default;
  int fd_ = -1;
};

// Content-addressed directory: objects/<sha256> holds the bytes and
// manifest.json indexes the entries. Entries are never modified; putting the
// same (kind, config hash, bytes) again returns the existing entry.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::string root);  // creates the tree if missing

  const std::string& root() const { return root_; }

  StoreEntry put(const std::string& kind, const std::string& bytes, const std::string& config_hash,
                 const std::map<std::string, std::string>& meta = {});
  // Bytes of the entry, verified against the recorded hash; StoreError when
  // the id is unknown, the object is missing or it has been altered.
  std::string get(const std::string& id) const;
  std::optional<StoreEntry> entry(const std::string& id) const;
  // In insertion order; empty kind lists everything.
  std::vector<StoreEntry> list(const std::string& kind = "") const;
  // Most recent entry of `kind` whose meta contains every pair of `match`.
  std::optional<StoreEntry> find(const std::string& kind, const std::map<std::string, std::string>& match) const;
  std::string object_path(const StoreEntry& entry) const;

 private:
  std::vector<StoreEntry> read_manifest() const;
  void write_manifest(const std::vector<StoreEntry>& entries) const;

  std::string root_;
};

std::string utc_timestamp();

}  // namespace hotspot
