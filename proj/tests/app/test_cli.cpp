#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "app_support.hpp"
#include "hotspot/cli.hpp"
#include "hotspot/store.hpp"

using apptest::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;

  // Ids from the manifest lines on stdout, optionally of one kind.
  std::vector<std::string> ids(const std::string& kind = "") const {
    std::vector<std::string> found;
    const std::regex line("id=(\\S+) kind=(\\S+) sha256=[0-9a-f]{64} config_hash=\\S*");
    std::istringstream in(out);
    std::string l;
    while (std::getline(in, l)) {
      std::smatch m;
      if (std::regex_match(l, m, line) && (kind.empty() || m[2] == kind)) found.push_back(m[1]);
    }
    return found;
  }
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hotspot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = hotspot::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    events = apptest::write_events(dir);
    store = dir.file("store");
    config = dir.file("c.json");
    std::ofstream(config) << R"({"events_csv": "events.csv", "grid": {"cell_m": 400}, "history_weeks": 3,
                                 "schedule": {"warmup": 10, "samples": 10}, "fast_eval": true,
                                 "windows": ["0-12", "12-24"]})";
  }

  std::vector<std::string> with_config(std::vector<std::string> args) const {
    args.insert(args.begin(), {"--config", config, "--store", store});
    return args;
  }

  TempDir dir;
  std::string events, store, config;
};

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  CliRun r = cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);

  r = cli({"fit", "--no-such-flag"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_NE(r.err.find("--no-such-flag"), std::string::npos);

  r = cli({"bogus-command"});
  EXPECT_EQ(r.code, 2);

  r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate-intel"), std::string::npos);

  r = cli({"forecast", "--out", "shapefile"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, ArgumentAndRuntimeErrors) {
  CliRun r = cli({"ingest", "--events", dir.file("missing.csv"), "--store", store});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("does not exist"), std::string::npos);

  r = cli({"ingest", "--store", store});
  EXPECT_EQ(r.code, 2);

  r = cli(with_config({"fit", "--week", "21-03-2019"}));
  EXPECT_EQ(r.code, 2);

  r = cli({"forecast", "--model", "model-0000", "--store", store});
  EXPECT_EQ(r.code, 2);

  // The data end in March 2019, so the training week holds no events.
  r = cli(with_config({"fit", "--week", "2019-06-02"}));
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST_F(CliTest, IngestPrintsManifestLines) {
  const CliRun r = cli({"ingest", "--events", events, "--store", store});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.ids("dataset").size(), 1u);
  EXPECT_EQ(r.ids("config").size(), 1u);
  EXPECT_EQ(r.ids("grid").size(), 1u);
  EXPECT_NE(r.err.find("rejected 0"), std::string::npos);
  const CliRun again = cli({"ingest", "--events", events, "--store", store});
  EXPECT_EQ(again.ids(), r.ids());
}

TEST_F(CliTest, SynthThenFitFromDataset) {
  CliRun s = cli({"synth", "--weeks", "8", "--clusters", "4", "--events-per-week", "40", "--seed", "2", "--store", store,
               "--csv", dir.file("synth.csv")});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto ds = s.ids("dataset");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(dir.file("synth.csv")));
  const CliRun f = cli(with_config({"fit", "--dataset", ds[0], "--week", "2019-02-17", "--warmup", "5", "--samples",
                                   "5"}));
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_EQ(f.ids("model").size(), 1u);
}

TEST_F(CliTest, FitForecastEvaluateDiff) {
  CliRun fit = cli(with_config({"fit", "--week", apptest::kTrainingWeek, "--summary", dir.file("summary.csv")}));
  ASSERT_EQ(fit.code, 0) << fit.err;
  const auto models = fit.ids("model");
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(fit.ids("summary").size(), 1u);
  EXPECT_EQ(read(dir.file("summary.csv")).rfind("param,mean,lower,upper", 0), 0u);

  // Same config and seed: the same artifact.
  EXPECT_EQ(cli(with_config({"fit", "--week", apptest::kTrainingWeek})).ids("model"), models);

  const CliRun geo = cli({"--store", store, "forecast", "--model", models[0], "--window", "12-24", "--out", "geojson",
                       "--output", dir.file("map.geojson")});
  ASSERT_EQ(geo.code, 0) << geo.err;
  const auto doc = nlohmann::json::parse(read(dir.file("map.geojson")));
  EXPECT_EQ(doc["type"], "FeatureCollection");
  EXPECT_EQ(doc["properties"]["week"], apptest::kForecastWeek);
  EXPECT_GT(doc["features"].size(), 100u);
  const auto forecasts = geo.ids("forecast");
  ASSERT_EQ(forecasts.size(), 1u);

  const CliRun csv = cli({"--store", store, "forecast", "--model", models[0], "--week", apptest::kForecastWeek,
                       "--out", "csv", "--output-dir", dir.path().string()});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_EQ(csv.ids("forecast").size(), 2u);  // one per configured window
  EXPECT_EQ(csv.ids("forecast")[1], forecasts[0]);
  const std::string csv_text = read(dir.file(std::string("forecast-") + apptest::kForecastWeek + "-0-12.csv"));
  EXPECT_EQ(csv_text.rfind("cell_id,density,rank_pct,class", 0), 0u);

  const CliRun ev = cli({"--store", store, "evaluate", "--forecast", forecasts[0], "--curve", dir.file("curve.csv")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.ids("metrics").size(), 1u);
  EXPECT_NE(ev.err.find("auc"), std::string::npos);
  EXPECT_NE(read(dir.file("curve.csv")).find("area_fraction,capture_fraction"), std::string::npos);

  const CliRun intel = cli(with_config({"simulate-intel", "--week", apptest::kForecastWeek, "--p", "0.5", "--d", "100",
                                     "--output", dir.file("intel.csv")}));
  ASSERT_EQ(intel.code, 0) << intel.err;
  ASSERT_EQ(intel.ids("intel").size(), 1u);
  const CliRun with = cli({"--store", store, "forecast", "--model", models[0], "--window", "12-24", "--intel",
                        intel.ids("intel")[0], "--output", dir.file("with.geojson")});
  ASSERT_EQ(with.code, 0) << with.err;
  const auto with_id = with.ids("forecast");
  ASSERT_EQ(with_id.size(), 1u);
  EXPECT_NE(with_id[0], forecasts[0]);

  const CliRun diff = cli({"--store", store, "diff", "--a", forecasts[0], "--b", with_id[0], "--output",
                        dir.file("diff.geojson")});
  ASSERT_EQ(diff.code, 0) << diff.err;
  EXPECT_EQ(diff.ids("diff").size(), 1u);
  EXPECT_EQ(nlohmann::json::parse(read(dir.file("diff.geojson")))["type"], "FeatureCollection");
}

TEST_F(CliTest, ForecastFromConfigFitsWhenNeeded) {
  const CliRun r = cli(with_config({"forecast", "--week", apptest::kForecastWeek, "--window", "0-12", "--output",
                                 dir.file("m.geojson")}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.ids("model").size(), 1u);
  EXPECT_EQ(r.ids("forecast").size(), 1u);
  const CliRun again = cli(with_config({"forecast", "--week", apptest::kForecastWeek, "--window", "0-12", "--output",
                                     dir.file("m2.geojson")}));
  EXPECT_TRUE(again.ids("model").empty());
  EXPECT_EQ(again.ids("forecast"), r.ids("forecast"));
  EXPECT_EQ(read(dir.file("m.geojson")), read(dir.file("m2.geojson")));
}

TEST_F(CliTest, BacktestAndStaleness) {
  const std::string out_dir = dir.file("bt");
  const CliRun bt = cli(with_config({"backtest", "--models", "1,3,5", "--weeks", "2", "--out-dir", out_dir}));
  ASSERT_EQ(bt.code, 0) << bt.err;
  EXPECT_EQ(bt.ids("backtest-rows").size(), 1u);
  EXPECT_EQ(bt.ids("backtest-summary").size(), 1u);
  const std::string summary = read(out_dir + "/backtest-summary.csv");
  EXPECT_NE(summary.find("# config_hash="), std::string::npos);
  EXPECT_NE(summary.find("model,window,intel,weeks"), std::string::npos);
  for (const char* m : {"\n1,all,", "\n3,all,", "\n5,all,"}) EXPECT_NE(summary.find(m), std::string::npos) << m;

  const CliRun st = cli(with_config({"staleness", "--lags", "0,1", "--weeks", "2", "--output", dir.file("st.csv")}));
  ASSERT_EQ(st.code, 0) << st.err;
  EXPECT_EQ(st.ids("staleness").size(), 1u);
  EXPECT_NE(read(dir.file("st.csv")).find("lag,samples,auc_mean"), std::string::npos);

  EXPECT_EQ(cli(with_config({"backtest", "--models", "7"})).code, 2);
  EXPECT_EQ(cli(with_config({"backtest", "--intel", "half"})).code, 2);
}
