#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "json.hpp"
#include "test_util.hpp"
#include "trapline/core/bytes.hpp"

namespace trapline {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI from the source tree so the demo config's relative paths resolve.
Run cli(const std::string& args, const std::string& env = "") {
  TempDir tmp;
  const auto err_path = tmp / "stderr";
  const std::string cmd = "cd '" + testing::source_dir().string() + "' && " + env + " '" TRAPLINE_CLI_PATH "' " +
                          args + " 2>'" + err_path.string() + "'";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (fs::exists(err_path)) r.err = read_file_text(err_path);
  return r;
}

std::size_t line_count(const fs::path& p) {
  auto t = read_file_text(p);
  return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
}

TEST(Cli, UnknownCommandIsUsageError) {
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("eval sample-size --population").code, 2);
}

TEST(Cli, EveryCommandHasHelp) {
  for (const char* c : {"", "prepare", "serve", "eval", "eval trial", "eval detections", "eval sample-size",
                        "config", "config emit", "config validate", "report", "mock-backend"}) {
    auto r = cli(std::string(c) + " --help");
    EXPECT_EQ(r.code, 0) << c;
    EXPECT_NE(r.out.find("Usage:"), std::string::npos) << c;
  }
}

TEST(Cli, ConfigEmitAndValidate) {
  TempDir dir;
  auto r = cli("config emit --out '" + (dir / "profile.cfg").string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  auto text = read_file_text(dir / "profile.cfg");
  EXPECT_NE(text.find("learning_rate = 0.0004\n"), std::string::npos);
  EXPECT_NE(text.find("batch_size = 32\n"), std::string::npos);
  EXPECT_EQ(cli("config validate '" + (dir / "profile.cfg").string() + "'").code, 0);

  auto pos = text.find("batch_size = 32");
  text.replace(pos, 15, "batch_size = 0");
  write_file_text(dir / "bad.cfg", text);
  r = cli("config validate '" + (dir / "bad.cfg").string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("batch_size"), std::string::npos);
}

TEST(Cli, TrialReplayOnTable6Fixture) {
  auto r = cli("eval trial --fixtures data/table6_fixture.jsonl");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("[218]"), std::string::npos);
  EXPECT_NE(r.out.find("87.90%"), std::string::npos);

  r = cli("eval trial --fixtures data/table6_fixture.jsonl --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["mode"], "replay");
  EXPECT_EQ(j["folds"].size(), 10u);
}

TEST(Cli, TrialSampleModePrintsSeed) {
  auto r = cli("eval trial --fixtures data/table6_fixture.jsonl --mode sample --folds 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("seed: "), std::string::npos);
  EXPECT_NE(r.out.find("Excluded: Garrulus glandarius"), std::string::npos);

  auto a = cli("eval trial --fixtures data/table6_fixture.jsonl --mode sample --folds 3 --seed 7");
  auto b = cli("eval trial --fixtures data/table6_fixture.jsonl --mode sample --folds 3 --seed 7");
  EXPECT_EQ(a.err.find("seed: "), std::string::npos);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SampleSize) {
  auto r = cli("eval sample-size --population 14740");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "375\n");
  EXPECT_EQ(cli("eval sample-size --population 14740 --confidence 0.42").code, 1);
}

TEST(Cli, DetectionSummary) {
  auto r = cli("eval detections --interchange data/demo/interchange.jsonl");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AP  @[IoU=0.50      | area=all   | maxDets=100] = "), std::string::npos);
  EXPECT_NE(r.out.find("per-class AP"), std::string::npos);
  EXPECT_EQ(cli("eval detections --interchange data/demo/missing.jsonl").code, 1);
}

TEST(Cli, ServeDryRunThenReport) {
  TempDir dir;
  const auto db = (dir / "demo.db").string();
  auto expect = nlohmann::json::parse(read_file_text(testing::source_dir() / "data/demo/expected_counts.json"));
  auto r = cli("--log-level error serve --config data/demo/serve.json --dry-run --db '" + db + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  auto stats = nlohmann::json::parse(r.out);
  EXPECT_EQ(stats["ingested"], expect["images"]);
  EXPECT_EQ(stats["blank_images"], expect["blank_images"]);
  EXPECT_EQ(stats["detection_images"], expect["detection_images"]);
  EXPECT_EQ(stats["detection_records"], expect["detection_records"]);
  EXPECT_EQ(stats["parked_remaining"], 0);
  EXPECT_TRUE(stats["queue"]["conserved"].get<bool>());
  EXPECT_EQ(stats["alerts_delivered"], 0);
  EXPECT_FALSE(fs::exists(testing::source_dir() / "demo-alerts.jsonl"));

  r = cli("report --db '" + db + "' --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  auto counts = nlohmann::json::parse(r.out);
  EXPECT_EQ(counts["total_images"], expect["images"]);
  EXPECT_EQ(counts["blank_images"], expect["blank_images"]);
  EXPECT_EQ(counts["total_detection_records"], expect["detection_records"]);

  // Sidecar times: two capture days on each of the two cameras.
  r = cli("report --db '" + db + "' --format json --from 2021-05-10T00:00:00Z --to 2021-05-12T00:00:00Z");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["total_images"], 4);

  // Same drop again: nothing new is classified.
  r = cli("--log-level error serve --config data/demo/serve.json --dry-run --db '" + db + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["already_stored"], expect["images"]);

  r = cli("report --db '" + db + "' --export detections --out '" + (dir / "det.jsonl").string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(dir / "det.jsonl"), expect["detection_records"].get<std::size_t>());
}

TEST(Cli, ServeHonoursEnvironmentOverrides) {
  TempDir dir;
  auto r = cli("--log-level error serve --config data/demo/serve.json --dry-run --db '" + (dir / "x.db").string() + "'",
               "TRAPLINE_WORKERS=many");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("TRAPLINE_WORKERS"), std::string::npos);
}

TEST(Cli, PrepareWritesRecordsAndSummary) {
  TempDir dir;
  const auto out = (dir / "birds.record").string();
  auto r = cli("prepare --annotations data/demo/annotations --images data/demo/images --out '" + out + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("seed: "), std::string::npos);
  auto summary = nlohmann::json::parse(read_file_text(dir / "birds.summary.json"));
  EXPECT_EQ(summary["parsed"], 12);
  EXPECT_EQ(summary["removed"], 2);
  EXPECT_EQ(summary["kept"], 10);
  EXPECT_EQ(summary["train"]["written"].get<int>() + summary["validation"]["written"].get<int>(), 10);
  EXPECT_TRUE(fs::exists(dir / "birds.train.record"));
  EXPECT_TRUE(fs::exists(dir / "birds.val.record"));

  r = cli("prepare --annotations data/demo/annotations --images data/demo/images --seed 3 --out '" + out + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.err.find("seed: "), std::string::npos);
  const auto first = read_file_text(dir / "birds.train.record");
  cli("prepare --annotations data/demo/annotations --images data/demo/images --seed 3 --out '" + out + "'");
  EXPECT_EQ(read_file_text(dir / "birds.train.record"), first);
}

}  // namespace
}  // namespace trapline
