#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "trapline/annotations/dataset.hpp"
#include "trapline/annotations/voc.hpp"

namespace trapline::annotations {
namespace {

std::string voc(const std::string& objects, const std::string& size = "<size><width>1024</width>"
                                                                      "<height>768</height><depth>3</depth></size>") {
  return "<annotation><folder>birds</folder><filename>img-1.jpg</filename>" + size + objects +
         "</annotation>";
}

std::string object(const std::string& name, int x0, int y0, int x1, int y1,
                   const std::string& extra = "") {
  return "<object><name>" + name + "</name><pose>Unspecified</pose><truncated>0</truncated>" +
         "<difficult>0</difficult>" + extra + "<bndbox><xmin>" + std::to_string(x0) +
         "</xmin><ymin>" + std::to_string(y0) + "</ymin><xmax>" + std::to_string(x1) +
         "</xmax><ymax>" + std::to_string(y1) + "</ymax></bndbox></object>";
}

TEST(ParseAnnotation, SingleObject) {
  auto parsed = parse_annotation(voc(object("Pica pica", 10, 20, 110, 220)));
  const auto& img = parsed.image;
  EXPECT_EQ(img.image_id, "img-1.jpg");
  EXPECT_EQ(img.width, 1024u);
  EXPECT_EQ(img.height, 768u);
  ASSERT_EQ(img.objects.size(), 1u);
  EXPECT_EQ(img.objects[0].label.canonical_name, "Pica pica");
  EXPECT_EQ(img.objects[0].box, (BoundingBox{10, 20, 110, 220}));
  EXPECT_FALSE(img.quality_flag);
  EXPECT_TRUE(parsed.warnings.empty());
}

TEST(ParseAnnotation, ZeroObjects) {
  auto parsed = parse_annotation(voc(""));
  EXPECT_TRUE(parsed.image.objects.empty());
}

TEST(ParseAnnotation, NoGoodBecomesQualityFlag) {
  auto parsed = parse_annotation(voc(object("no good", 0, 0, 5, 5)));
  EXPECT_TRUE(parsed.image.objects.empty());
  ASSERT_TRUE(parsed.image.quality_flag);
  EXPECT_EQ(*parsed.image.quality_flag, "no good");
}

TEST(ParseAnnotation, MissingSizeIsFatal) {
  EXPECT_THROW(parse_annotation(voc(object("Pica pica", 1, 1, 5, 5), "")), ParseError);
  EXPECT_THROW(parse_annotation("<annotation><filename>x</filename>"), ParseError);
  EXPECT_THROW(parse_annotation("<other/>"), ParseError);
}

TEST(ParseAnnotation, UnknownFieldWarnsButKeeps) {
  auto parsed = parse_annotation(voc(object("Pica pica", 1, 1, 5, 5, "<colour>black</colour>")));
  ASSERT_EQ(parsed.image.objects.size(), 1u);
  ASSERT_EQ(parsed.warnings.size(), 1u);
  EXPECT_NE(parsed.warnings[0].find("colour"), std::string::npos);
  EXPECT_NE(parsed.warnings[0].find("img-1.jpg"), std::string::npos);
}

TEST(ParseAnnotation, MalformedBoxReportedWithContext) {
  auto parsed = parse_annotation(voc(object("Pica pica", 50, 1, 5, 5) +
                                     "<object><name>Pica pica</name><bndbox><xmin>a</xmin>"
                                     "</bndbox></object>"));
  ASSERT_EQ(parsed.image.objects.size(), 1u);
  ASSERT_EQ(parsed.warnings.size(), 2u);
  EXPECT_NE(parsed.warnings[0].find("xmin >= xmax"), std::string::npos);
  EXPECT_NE(parsed.warnings[1].find("img-1.jpg object 1"), std::string::npos);
}

AnnotatedImage image(std::string id, std::uint32_t w, std::uint32_t h,
                     std::vector<TaggedObject> objs = {}) {
  AnnotatedImage img;
  img.image_id = std::move(id);
  img.width = w;
  img.height = h;
  img.objects = std::move(objs);
  return img;
}

TaggedObject tag(const std::string& name, BoundingBox b) { return {species_label(name), b}; }

TEST(FilterUnusable, Examples) {
  std::vector<AnnotatedImage> imgs = {image("a", 100, 100, {tag("Pica pica", {0, 0, 10, 10})}),
                                      image("b", 100, 100, {tag("Pica pica", {0, 0, 10, 10})}),
                                      image("c", 100, 100, {tag("Pica pica", {0, 0, 10, 10})})};
  imgs[1].quality_flag = "no good";
  auto r = filter_unusable(imgs);
  ASSERT_EQ(r.kept.size(), 2u);
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.kept[0].image_id, "a");
  EXPECT_EQ(r.kept[1].image_id, "c");
  EXPECT_EQ(r.removed[0].image_id, "b");

  for (auto& i : imgs) i.quality_flag = "no good";
  EXPECT_TRUE(filter_unusable(imgs).kept.empty());
}

TEST(FilterUnusable, InvalidObjectDroppedImageKept) {
  std::vector<AnnotatedImage> imgs = {image("a", 100, 100,
                                            {tag("Pica pica", {0, 0, 10, 10}),
                                             tag("Pica pica", {0, 0, 200, 10})}),
                                      image("b", 100, 100, {tag("Pica pica", {50, 0, 10, 10})}),
                                      image("c", 100, 100)};
  auto r = filter_unusable(imgs);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].objects.size(), 1u);
  ASSERT_EQ(r.removed.size(), 2u);
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(DatasetSummary, MeanResolution) {
  std::vector<AnnotatedImage> imgs = {image("a", 100, 100), image("b", 200, 200), image("c", 300, 100)};
  auto s = dataset_summary(imgs);
  // (100+200+300)/3 and (100+200+100)/3 by hand.
  EXPECT_DOUBLE_EQ(s.mean_width, 200.0);
  EXPECT_NEAR(s.mean_height, 133.33, 0.005);
  EXPECT_EQ(s.image_count, 3u);
}

TEST(DatasetSummary, CountsTagsNotImages) {
  std::vector<AnnotatedImage> imgs = {image("a", 100, 100,
                                            {tag("Pica pica", {0, 0, 1, 1}), tag("Pica pica", {1, 1, 2, 2}),
                                             tag("Pica pica", {2, 2, 3, 3})})};
  auto s = dataset_summary(imgs);
  EXPECT_EQ(s.tag_count, 3u);
  EXPECT_EQ(s.class_counts.at("Pica pica"), 3u);
}

TEST(DatasetSummary, HistogramAndErrors) {
  std::vector<AnnotatedImage> imgs = {image("a", 640, 480), image("b", 640, 480)};
  auto s = dataset_summary(imgs);
  ASSERT_EQ(s.resolution_histogram.size(), 1u);
  EXPECT_EQ(s.resolution_histogram.begin()->second, 2u);
  EXPECT_THROW(dataset_summary(std::vector<AnnotatedImage>{}), ValidationError);
}

TEST(DatasetSummary, TagCountMatchesFilteredObjects) {
  std::mt19937 rng(9);
  std::vector<AnnotatedImage> imgs;
  for (int i = 0; i < 200; ++i) {
    auto img = image("img" + std::to_string(i), 100, 100);
    int n = static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) {
      double x = rng() % 120;  // some boxes leave the frame
      img.objects.push_back(tag(k % 2 ? "Pica pica" : "Erithacus rubecula", {x, 0, x + 5, 5}));
    }
    if (rng() % 10 == 0) img.quality_flag = "no good";
    imgs.push_back(img);
  }
  auto f = filter_unusable(imgs);
  EXPECT_EQ(f.kept.size() + f.removed.size(), imgs.size());
  std::size_t surviving = 0;
  for (const auto& img : f.kept) surviving += img.objects.size();
  EXPECT_EQ(dataset_summary(f.kept).tag_count, surviving);
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("img-" + std::to_string(i));
  return v;
}

TEST(SplitDataset, Sizes) {
  auto s = split_dataset(std::span<const std::string>(ids(100)), 0.9, 1);
  EXPECT_EQ(s.train.size(), 90u);
  EXPECT_EQ(s.validation.size(), 10u);
  auto big = split_dataset(std::span<const std::string>(ids(32981)), 0.9, 1);
  EXPECT_EQ(big.train.size(), 29683u);
  EXPECT_EQ(big.validation.size(), 3298u);
}

TEST(SplitDataset, DeterministicUnderSeed) {
  auto v = ids(500);
  auto a = split_dataset(std::span<const std::string>(v), 0.9, 77);
  auto b = split_dataset(std::span<const std::string>(v), 0.9, 77);
  auto c = split_dataset(std::span<const std::string>(v), 0.9, 78);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_NE(a.validation, c.validation);
}

TEST(SplitDataset, PartitionProperty) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng() % 300;
    double ratio = 0.01 + 0.98 * std::uniform_real_distribution<double>(0, 1)(rng);
    auto v = ids(n);
    auto s = split_dataset(std::span<const std::string>(v), ratio, rng());
    EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(ratio * n)));
    std::set<std::string> all(s.train.begin(), s.train.end());
    for (const auto& x : s.validation) EXPECT_TRUE(all.insert(x).second) << "duplicate " << x;
    EXPECT_EQ(all, std::set<std::string>(v.begin(), v.end()));
    // Sizes depend only on N and the ratio.
    std::shuffle(v.begin(), v.end(), rng);
    auto t = split_dataset(std::span<const std::string>(v), ratio, s.seed);
    EXPECT_EQ(t.train.size(), s.train.size());
  }
}

TEST(SplitDataset, Errors) {
  auto v = ids(10);
  EXPECT_THROW(split_dataset(std::span<const std::string>(v), 0.0, 1), ValidationError);
  EXPECT_THROW(split_dataset(std::span<const std::string>(v), 1.0, 1), ValidationError);
  EXPECT_THROW(split_dataset(std::span<const std::string>(), 0.5, 1), ValidationError);
  auto one = ids(1);
  auto s = split_dataset(std::span<const std::string>(one), 0.9, 1);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_TRUE(s.validation.empty());
  EXPECT_FALSE(s.warnings.empty());
}

}  // namespace
}  // namespace trapline::annotations
