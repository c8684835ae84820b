#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trapline/metrics/average_precision.hpp"
#include "trapline/metrics/interchange.hpp"

namespace trapline::metrics {
namespace {

const SpeciesLabel kPica = species_label("Pica pica");

ImageEval image(std::vector<TaggedObject> truths, std::vector<Detection> dets, std::string id = "img") {
  return {std::move(id), std::move(truths), std::move(dets)};
}

TEST(AveragePrecision, SingleHit) {
  std::vector<ImageEval> imgs = {image({{kPica, {0, 0, 10, 10}}}, {{kPica, 0.9, {0, 0, 10, 10}}})};
  EXPECT_DOUBLE_EQ(*average_precision(imgs, kPica, 0.5), 1.0);
}

TEST(AveragePrecision, TwoPointCurve) {
  std::vector<ImageEval> imgs = {image({{kPica, {0, 0, 10, 10}}, {kPica, {50, 50, 60, 60}}},
                                       {{kPica, 0.9, {0, 0, 10, 10}}, {kPica, 0.8, {20, 20, 30, 30}}})};
  // Brute-force 101-point oracle over the (R=0.5,P=1), (R=0.5,P=0.5) curve.
  auto expected = oracle::exhaustive_ap(imgs, "Pica pica", 0.5);
  ASSERT_TRUE(expected);
  EXPECT_NEAR(*expected, 51.0 / 101.0, 1e-15);
  EXPECT_NEAR(*average_precision(imgs, kPica, 0.5), 51.0 / 101.0, 1e-15);
}

TEST(AveragePrecision, EdgeCases) {
  std::vector<ImageEval> no_dets = {image({{kPica, {0, 0, 10, 10}}}, {})};
  EXPECT_DOUBLE_EQ(*average_precision(no_dets, kPica, 0.5), 0.0);
  std::vector<ImageEval> no_truths = {image({}, {{kPica, 0.9, {0, 0, 10, 10}}})};
  EXPECT_DOUBLE_EQ(*average_precision(no_truths, kPica, 0.5), 0.0);
  std::vector<ImageEval> nothing = {image({}, {})};
  EXPECT_FALSE(average_precision(nothing, kPica, 0.5));
}

TEST(MeanAveragePrecision, Examples) {
  EXPECT_DOUBLE_EQ(mean_average_precision({{"A", 0.5}}), 0.5);
  EXPECT_NEAR(mean_average_precision({{"A", 0.6}, {"B", 0.8}}), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(mean_average_precision({{"A", 0.6}, {"B", std::nullopt}}), 0.6);
  EXPECT_THROW(mean_average_precision({{"A", std::nullopt}}), ValidationError);
  EXPECT_THROW(mean_average_precision({}), ValidationError);
}

TEST(MapAt, PerfectDetections) {
  std::vector<ImageEval> imgs = {
      image({{kPica, {0, 0, 10, 10}}, {species_label("Columba palumbus"), {0, 0, 200, 200}}},
            {{kPica, 0.9, {0, 0, 10, 10}}, {species_label("Columba palumbus"), 0.7, {0, 0, 200, 200}}})};
  for (auto s : {IouSetting::kAt50, IouSetting::kAt75, IouSetting::kAveraged}) {
    EXPECT_DOUBLE_EQ(map_at(imgs, s), 1.0);
  }
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAveraged, AreaRange::kSmall), 1.0);
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAveraged, AreaRange::kLarge), 1.0);
  EXPECT_THROW(map_at(imgs, IouSetting::kAveraged, AreaRange::kMedium), ValidationError);
}

TEST(MapAt, ThresholdGate) {
  std::vector<ImageEval> imgs = {image({{kPica, {0, 0, 100, 100}}}, {{kPica, 0.9, {0, 0, 100, 60}}})};
  EXPECT_NEAR(iou({0, 0, 100, 100}, {0, 0, 100, 60}), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAt50), 1.0);
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAt75), 0.0);
}

TEST(MapAt, SizeFilterDropsOutOfBucketTruthsAndTheirMatches) {
  std::vector<ImageEval> imgs = {image({{kPica, {0, 0, 10, 10}}, {kPica, {100, 100, 300, 300}}},
                                       {{kPica, 0.9, {100, 100, 300, 300}}, {kPica, 0.8, {0, 0, 10, 10}}})};
  // All sizes: both found. Small bucket: only the 10x10 truth counts and the
  // large detection is ignored, not a false positive.
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAt50, AreaRange::kAll), 1.0);
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAt50, AreaRange::kSmall), 1.0);
  EXPECT_DOUBLE_EQ(map_at(imgs, IouSetting::kAt50, AreaRange::kLarge), 1.0);
}

TEST(MapAt, ThreeClassScenarioMatchesOracle) {
  const std::vector<std::string> labels = {"Pica pica", "Columba palumbus", "Erithacus rubecula"};
  std::mt19937 rng(101);
  auto scene = oracle::random_scene(rng, labels);
  while (labels_in(scene).size() < 3) scene = oracle::random_scene(rng, labels);
  for (double thr : {0.5, 0.75}) {
    std::map<std::string, std::optional<double>> expected;
    for (const auto& l : labels) expected[l] = oracle::exhaustive_ap(scene, l, thr);
    double want = mean_average_precision(expected);
    EXPECT_NEAR(map_at(scene, thr == 0.5 ? IouSetting::kAt50 : IouSetting::kAt75), want, 1e-12);
  }
}

TEST(AverageRecall, Examples) {
  std::vector<ImageEval> exact = {image({{kPica, {0, 0, 10, 10}}, {kPica, {20, 20, 30, 30}}},
                                        {{kPica, 0.9, {0, 0, 10, 10}}, {kPica, 0.8, {20, 20, 30, 30}}})};
  EXPECT_DOUBLE_EQ(*average_recall_at_k(exact, 10), 1.0);
  EXPECT_DOUBLE_EQ(*average_recall_at_k(exact, 1), 0.5);

  std::vector<ImageEval> partial = {image({{kPica, {0, 0, 50, 50}}}, {{kPica, 0.9, {0, 0, 50, 36}}})};
  EXPECT_DOUBLE_EQ(*oracle::enumerated_ar(partial, 100), 0.5);
  EXPECT_DOUBLE_EQ(*average_recall_at_k(partial, 100), 0.5);

  std::vector<ImageEval> none = {image({}, {{kPica, 0.9, {0, 0, 1, 1}}})};
  EXPECT_FALSE(average_recall_at_k(none, 10));
  EXPECT_THROW(average_recall_at_k(exact, 0), ValidationError);
}

TEST(SizeBucket, Thresholds) {
  EXPECT_EQ(size_bucket({0, 0, 10, 10}), SizeBucket::kSmall);
  EXPECT_EQ(size_bucket({0, 0, 50, 50}), SizeBucket::kMedium);
  EXPECT_EQ(size_bucket({0, 0, 100, 100}), SizeBucket::kLarge);
  EXPECT_EQ(size_bucket({0, 0, 32, 32}), SizeBucket::kMedium);
  EXPECT_EQ(size_bucket({0, 0, 31.9, 32}), SizeBucket::kSmall);
  EXPECT_EQ(size_bucket({0, 0, 96, 96}), SizeBucket::kLarge);
}

TEST(AveragePrecision, OracleEquivalenceOnRandomScenes) {
  const std::vector<std::string> labels = {"A a", "B b"};
  std::mt19937 rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    auto scene = oracle::random_scene(rng, labels);
    for (const auto& l : labels) {
      for (double thr : {0.5, 0.65, 0.8}) {
        auto want = oracle::exhaustive_ap(scene, l, thr);
        auto got = average_precision(scene, species_label(l), thr);
        ASSERT_EQ(want.has_value(), got.has_value());
        if (want) {
          EXPECT_NEAR(*got, *want, 1e-12);
        }
      }
      auto want_k = oracle::exhaustive_ap(scene, l, 0.5, 1);
      auto got_k = average_precision(scene, species_label(l), 0.5, AreaRange::kAll, 1);
      ASSERT_EQ(want_k.has_value(), got_k.has_value());
      if (want_k) {
        EXPECT_NEAR(*got_k, *want_k, 1e-12);
      }
    }
  }
}

TEST(AveragePrecision, NonIncreasingInThreshold) {
  const std::vector<std::string> labels = {"A a", "B b"};
  std::mt19937 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    auto scene = oracle::random_scene(rng, labels);
    for (const auto& l : labels) {
      std::optional<double> prev;
      for (double thr : {0.3, 0.5, 0.6, 0.75, 0.9}) {
        auto ap = average_precision(scene, species_label(l), thr);
        if (prev && ap) {
          EXPECT_LE(*ap, *prev + 1e-12);
        }
        prev = ap;
      }
    }
  }
}

TEST(Interchange, RoundTripAndSummary) {
  std::vector<ImageEval> imgs = {image({{kPica, {0, 0, 10, 10}}}, {{kPica, 0.9, {0, 0, 10, 10}}}, "a.jpg"),
                                 image({}, {}, "b.jpg")};
  std::stringstream ss;
  write_image_evals(ss, imgs);
  auto back = read_image_evals(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].image_id, "a.jpg");
  EXPECT_EQ(back[0].detections, imgs[0].detections);
  EXPECT_EQ(back[0].truths, imgs[0].truths);
  auto s = summarize_detections(back);
  EXPECT_DOUBLE_EQ(*s.map, 1.0);
  EXPECT_DOUBLE_EQ(*s.ar_1, 1.0);
  EXPECT_FALSE(s.map_medium);

  std::stringstream bad("{\"image_id\": \"x\", \"detections\": [{\"label\": \"Pica pica\", \"score\": 2, "
                        "\"box\": [0,0,1,1]}]}\n");
  EXPECT_THROW(read_image_evals(bad), ParseError);
}

}  // namespace
}  // namespace trapline::metrics
