#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "app_support.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/store.hpp"

using namespace hotspot;
using apptest::TempDir;

TEST(ArtifactStore, PutGetRoundTrip) {
  TempDir dir;
  ArtifactStore store(dir.file("s"));
  const StoreEntry e = store.put("forecast", "payload", "cfg", {{"week", "2021-03-21"}});
  EXPECT_EQ(e.kind, "forecast");
  EXPECT_EQ(e.id.rfind("forecast-", 0), 0u);
  EXPECT_EQ(e.config_hash, "cfg");
  EXPECT_EQ(e.sha256.size(), 64u);
  EXPECT_EQ(e.created.size(), 20u);
  EXPECT_EQ(store.get(e.id), "payload");
  EXPECT_EQ(store.entry(e.id)->meta.at("week"), "2021-03-21");
  EXPECT_EQ(e.manifest_line(), "id=" + e.id + " kind=forecast sha256=" + e.sha256 + " config_hash=cfg");
}

TEST(ArtifactStore, PutIsIdempotentAndEntriesImmutable) {
  TempDir dir;
  ArtifactStore store(dir.file("s"));
  const StoreEntry a = store.put("model", "bytes", "h1", {{"note", "first"}});
  const StoreEntry b = store.put("model", "bytes", "h1", {{"note", "second"}});
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(b.meta.at("note"), "first");
  EXPECT_EQ(b.created, a.created);
  EXPECT_EQ(store.list().size(), 1u);
  const StoreEntry c = store.put("model", "bytes", "h2");
  EXPECT_NE(c.id, a.id);
  EXPECT_EQ(c.sha256, a.sha256);
  EXPECT_EQ(store.list("model").size(), 2u);
  EXPECT_EQ(store.get(c.id), "bytes");
}

TEST(ArtifactStore, DetectsTamperingAndUnknownIds) {
  TempDir dir;
  ArtifactStore store(dir.file("s"));
  const StoreEntry e = store.put("intel", "lon,lat\n", "h");
  EXPECT_THROW(store.get("intel-0000"), NotFoundError);
  EXPECT_FALSE(store.entry("intel-0000"));
  std::ofstream(store.object_path(e), std::ios::trunc) << "lon,lat\n1,2\n";
  EXPECT_THROW(store.get(e.id), StoreError);
  std::filesystem::remove(store.object_path(e));
  EXPECT_THROW(store.get(e.id), StoreError);
  EXPECT_THROW(store.put("", "x", "h"), ArgumentError);
}

TEST(ArtifactStore, ManifestPersistsAndFindsLatestMatch) {
  TempDir dir;
  {
    ArtifactStore store(dir.file("s"));
    store.put("forecast", "a", "h", {{"week", "w1"}, {"window", "0-4"}});
    store.put("forecast", "b", "h", {{"week", "w1"}, {"window", "4-8"}});
    store.put("forecast", "c", "h", {{"week", "w1"}, {"window", "0-4"}});
    store.put("model", "d", "h", {{"week", "w1"}});
  }
  ArtifactStore reopened(dir.file("s"));
  ASSERT_EQ(reopened.list().size(), 4u);
  EXPECT_EQ(reopened.list("forecast").size(), 3u);
  const auto hit = reopened.find("forecast", {{"week", "w1"}, {"window", "0-4"}});
  ASSERT_TRUE(hit);
  EXPECT_EQ(reopened.get(hit->id), "c");
  EXPECT_FALSE(reopened.find("forecast", {{"week", "w2"}}));

  std::ifstream in(dir.file("s/manifest.json"));
  const auto manifest = nlohmann::json::parse(in);
  EXPECT_EQ(manifest["entries"].size(), 4u);
  EXPECT_EQ(manifest["entries"][0]["config_hash"], "h");
}

TEST(ArtifactStore, ConcurrentWritersKeepEveryEntry) {
  TempDir dir;
  ArtifactStore store(dir.file("s"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&store, t] {
      ArtifactStore own(store.root());
      for (int k = 0; k < 10; ++k) {
        own.put("metrics", std::to_string(t) + ":" + std::to_string(k), "h");
        own.put("metrics", "shared-" + std::to_string(k), "h");
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store.list("metrics").size(), 70u);
  for (const auto& e : store.list()) EXPECT_NO_THROW(store.get(e.id));
}

TEST(StoreLock, SharedAndExclusive) {
  TempDir dir;
  ArtifactStore store(dir.file("s"));
  {
    StoreLock writer(store.root(), StoreLock::Mode::exclusive);
    EXPECT_FALSE(StoreLock::try_acquire(store.root(), StoreLock::Mode::shared));
    EXPECT_FALSE(StoreLock::try_acquire(store.root(), StoreLock::Mode::exclusive));
  }
  {
    StoreLock reader(store.root(), StoreLock::Mode::shared);
    EXPECT_TRUE(StoreLock::try_acquire(store.root(), StoreLock::Mode::shared));
    EXPECT_FALSE(StoreLock::try_acquire(store.root(), StoreLock::Mode::exclusive));
  }
  EXPECT_TRUE(StoreLock::try_acquire(store.root(), StoreLock::Mode::exclusive));
}
