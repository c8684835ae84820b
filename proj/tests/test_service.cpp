#include <gtest/gtest.h>

#include "drop_fixtures.hpp"
#include "test_util.hpp"
#include "trapline/service/config.hpp"
#include "trapline/service/pipeline.hpp"

namespace trapline::service {
namespace {

using namespace std::chrono_literals;
using testing::TempDir;

bool no_sleep(Millis, std::stop_token) { return true; }

PipelineOptions quick_options(unsigned workers = 4) {
  PipelineOptions o;
  o.workers = workers;
  o.queue_capacity = 8;  // small, so producers block
  o.redrive_wait = 0ms;
  return o;
}

inference::BackendConfig quick_backend(unsigned retries = 2) {
  inference::BackendConfig b;
  b.max_retries = retries;
  b.backoff_base = 0ms;
  b.backoff_cap = 0ms;
  return b;
}

void expect_store_matches(store::Store& s, const testing::DropExpectation& x) {
  auto counts = s.species_counts();
  EXPECT_EQ(counts.total_images, x.images);
  EXPECT_EQ(counts.blank_images, x.blank_images);
  EXPECT_EQ(counts.detection_images, x.detection_images);
  EXPECT_EQ(counts.total_detection_records, x.detection_records);
}

TEST(Pipeline, DirectoryRunStoresEverything) {
  TempDir dir;
  inference::MockBackend backend;
  auto x = testing::make_drop(dir.path(), 40, backend);
  store::Store s(":memory:");
  Pipeline p(backend, s, quick_backend(), quick_options(), no_sleep);
  ingest::DirectorySource src(dir.path());
  auto stats = p.run_once(src);

  EXPECT_EQ(stats.ingested, 40u);
  EXPECT_EQ(stats.classified, 40u);
  EXPECT_EQ(stats.blank_images, x.blank_images);
  EXPECT_EQ(stats.detection_images, x.detection_images);
  EXPECT_EQ(stats.detection_records, x.detection_records);
  EXPECT_EQ(stats.parked, 0u);
  EXPECT_TRUE(stats.queue.conserved());
  EXPECT_EQ(stats.queue.dequeued, 40u);
  expect_store_matches(s, x);
}

TEST(Pipeline, ReplayIsSkipped) {
  TempDir dir;
  inference::MockBackend backend;
  auto x = testing::make_drop(dir.path(), 15, backend);
  store::Store s(":memory:");
  {
    Pipeline p(backend, s, quick_backend(), quick_options(), no_sleep);
    ingest::DirectorySource src(dir.path());
    p.run_once(src);
  }
  const auto calls = backend.calls();
  Pipeline again(backend, s, quick_backend(), quick_options(), no_sleep);
  ingest::DirectorySource src(dir.path());
  auto stats = again.run_once(src);
  EXPECT_EQ(stats.already_stored, 15u);
  EXPECT_EQ(stats.classified, 0u);
  EXPECT_EQ(backend.calls(), calls);
  expect_store_matches(s, x);
}

TEST(Pipeline, OutageIsParkedThenRedriven) {
  TempDir dir;
  inference::MockBackend backend;
  auto x = testing::make_drop(dir.path(), 20, backend);
  backend.fail_next(30, 503);  // more than 20 images x 1 retry can absorb
  store::Store s(":memory:");
  auto opt = quick_options(2);
  opt.redrive_rounds = 5;
  Pipeline p(backend, s, quick_backend(1), opt, no_sleep);
  ingest::DirectorySource src(dir.path());
  auto stats = p.run_once(src);
  EXPECT_GT(stats.parked, 0u);
  EXPECT_GT(stats.redriven, 0u);
  EXPECT_EQ(s.parked_count(), 0u);
  EXPECT_EQ(stats.classified, 20u);
  expect_store_matches(s, x);
}

TEST(Pipeline, StoreFailureParksTheEvent) {
  TempDir dir;
  inference::MockBackend backend;
  auto x = testing::make_drop(dir.path(), 12, backend);
  store::Store s(":memory:");
  std::atomic<int> faults{2};
  s.set_fault_hook([&](std::size_t) {
    if (faults.fetch_sub(1) > 0) throw StorageError("disk hiccup");
  });
  Pipeline p(backend, s, quick_backend(), quick_options(1), no_sleep);
  ingest::DirectorySource src(dir.path());
  auto stats = p.run_once(src);
  EXPECT_EQ(stats.store_failures, 2u);
  EXPECT_EQ(s.parked_count(), 0u);
  expect_store_matches(s, x);
}

TEST(Pipeline, DryRunDoesNotDeliverAlerts) {
  TempDir dir;
  inference::MockBackend backend;
  testing::make_drop(dir.path(), 10, backend);
  store::Store s(":memory:");
  auto opt = quick_options();
  opt.dry_run = true;
  opt.rules = {{"magpie", species_label("Pica pica"), 0.5, "log:" + (dir / "alerts.jsonl").string()}};
  store::AlertDispatcher dispatcher(store::store_recorder(s));
  Pipeline p(backend, s, quick_backend(), opt, no_sleep, &dispatcher);
  ingest::DirectorySource src(dir.path());
  auto stats = p.run_once(src);
  dispatcher.shutdown();
  EXPECT_GT(stats.alerts_fired, 0u);
  EXPECT_FALSE(std::filesystem::exists(dir / "alerts.jsonl"));
  EXPECT_TRUE(s.alerts().empty());
}

TEST(Pipeline, LiveAlertsAreDelivered) {
  TempDir dir;
  TempDir out;
  inference::MockBackend backend;
  testing::make_drop(dir.path(), 10, backend);
  store::Store s(":memory:");
  auto opt = quick_options();
  opt.rules = {{"magpie", species_label("Pica pica"), 0.5, "log:" + (out / "alerts.jsonl").string()}};
  store::AlertDispatcher dispatcher(store::store_recorder(s));
  Pipeline p(backend, s, quick_backend(), opt, no_sleep, &dispatcher);
  ingest::DirectorySource src(dir.path());
  auto stats = p.run_once(src);
  dispatcher.flush();
  dispatcher.shutdown();
  ASSERT_GT(stats.alerts_fired, 0u);
  EXPECT_EQ(dispatcher.delivered(), stats.alerts_fired);
  EXPECT_EQ(s.alerts().size(), stats.alerts_fired);
  auto text = read_file_text(out / "alerts.jsonl");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), stats.alerts_fired);
}

TEST(Pipeline, RunStopsAndDrains) {
  TempDir dir;
  inference::MockBackend backend;
  auto x = testing::make_drop(dir.path(), 25, backend);
  store::Store s(":memory:");
  auto opt = quick_options();
  opt.scan_interval = 20ms;
  Pipeline p(backend, s, quick_backend(), opt);
  ingest::DirectorySource src(dir.path());
  std::stop_source stop;
  std::jthread runner([&] { p.run(&src, stop.get_token()); });
  for (int i = 0; i < 500 && s.species_counts().total_images < x.images; ++i) std::this_thread::sleep_for(10ms);
  stop.request_stop();
  runner.join();
  expect_store_matches(s, x);
  EXPECT_TRUE(p.stats().queue.conserved());
  EXPECT_EQ(p.stats().queue.in_flight, 0u);
}

TEST(Config, FileThenEnvironment) {
  TempDir dir;
  write_file_text(dir / "cfg.json", R"({
    "db": "from-file.db",
    "drop_dir": "/data/drop",
    "backend": {"endpoint": "http://10.0.0.5:8500", "workers": 2, "max_retries": 7},
    "queue_capacity": 64,
    "alerts": [{"rule_id": "jay", "species": "Garrulus glandarius", "min_prob": 0.8, "channel": "log:/tmp/a"}],
    "cameras": [{"camera_id": "CAM-01", "width": 1920, "height": 1080, "dpi": 72, "sensitivity": "high"}]
  })");
  std::map<std::string, std::string> env{{"TRAPLINE_DB", "env.db"}, {"TRAPLINE_WORKERS", "6"}};
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    return it == env.end() ? std::nullopt : std::optional(it->second);
  };
  auto cfg = load_config(dir / "cfg.json", lookup);
  EXPECT_EQ(cfg.db, "env.db");
  EXPECT_EQ(cfg.backend.workers, 6u);
  EXPECT_EQ(cfg.backend.max_retries, 7u);
  EXPECT_EQ(cfg.backend.endpoint, "http://10.0.0.5:8500");
  EXPECT_EQ(cfg.drop_dir, "/data/drop");
  EXPECT_EQ(cfg.queue_capacity, 64u);
  ASSERT_EQ(cfg.alerts.size(), 1u);
  EXPECT_EQ(cfg.alerts[0].species.canonical_name, "Garrulus glandarius");
  ASSERT_EQ(cfg.cameras.size(), 1u);
  EXPECT_EQ(cfg.cameras[0].sensitivity, Sensitivity::kHigh);
  cfg.validate();

  env["TRAPLINE_WORKERS"] = "six";
  EXPECT_THROW(load_config(dir / "cfg.json", lookup), ValidationError);
}

TEST(Config, RejectsUnknownKeysAndBadJson) {
  TempDir dir;
  write_file_text(dir / "typo.json", R"({"dbb": "x"})");
  EXPECT_THROW(load_config(dir / "typo.json", [](const std::string&) { return std::nullopt; }), ParseError);
  write_file_text(dir / "broken.json", "{");
  EXPECT_THROW(load_config(dir / "broken.json", [](const std::string&) { return std::nullopt; }), ParseError);
  auto cfg = load_config(std::nullopt, [](const std::string&) { return std::nullopt; });
  EXPECT_EQ(cfg.db, "trapline.db");
  cfg.queue_capacity = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
}  // namespace trapline::service
