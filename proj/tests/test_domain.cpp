#include <gtest/gtest.h>

#include <random>

#include "trapline/core/bytes.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/random.hpp"
#include "trapline/core/time.hpp"

namespace trapline {
namespace {

// Counts unit cells of the integer grid covered by an integer-cornered box.
int grid_cell_count(int xmin, int ymin, int xmax, int ymax) {
  int n = 0;
  for (int x = 0; x < 64; ++x) {
    for (int y = 0; y < 64; ++y) {
      if (x >= xmin && x + 1 <= xmax && y >= ymin && y + 1 <= ymax) ++n;
    }
  }
  return n;
}

TEST(BoxArea, Examples) {
  EXPECT_DOUBLE_EQ(box_area({0, 0, 10, 10}), 100.0);
  EXPECT_DOUBLE_EQ(box_area({5, 5, 15, 15}), 100.0);
  EXPECT_EQ(grid_cell_count(0, 0, 10, 5), 50);
  EXPECT_DOUBLE_EQ(box_area({0, 0, 10, 5}), 50.0);
}

TEST(BoxArea, DegenerateThrows) {
  EXPECT_THROW(box_area({0, 0, 0, 10}), ValidationError);
  EXPECT_THROW(box_area({0, 0, 10, 0}), ValidationError);
  EXPECT_THROW(box_area({10, 0, 5, 10}), ValidationError);
}

TEST(BoxArea, TranslationInvariantAndMatchesGrid) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coord(0, 30);
  std::uniform_int_distribution<int> shift(-1000, 1000);
  for (int i = 0; i < 500; ++i) {
    int x0 = coord(rng), y0 = coord(rng);
    int x1 = x0 + 1 + coord(rng), y1 = y0 + 1 + coord(rng);
    BoundingBox b{double(x0), double(y0), double(x1), double(y1)};
    EXPECT_DOUBLE_EQ(box_area(b), grid_cell_count(x0, y0, x1, y1));
    EXPECT_DOUBLE_EQ(box_area(b), box_area(b.translated(shift(rng) * 0.5, shift(rng) * 0.25)));
  }
}

TEST(ValidateBox, Examples) {
  EXPECT_TRUE(validate_box({0, 0, 10, 10}, 100, 100).empty());
  auto inverted = validate_box({10, 10, 5, 20}, 100, 100);
  ASSERT_EQ(inverted.size(), 1u);
  EXPECT_EQ(inverted[0], BoxViolation::kXInverted);
  auto wide = validate_box({0, 0, 200, 10}, 100, 100);
  ASSERT_EQ(wide.size(), 1u);
  EXPECT_EQ(wide[0], BoxViolation::kExceedsWidth);
}

TEST(ValidateBox, ReportsEveryViolation) {
  auto v = validate_box({-5, 20, -10, 10}, 4, 4);
  EXPECT_NE(std::find(v.begin(), v.end(), BoxViolation::kXInverted), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), BoxViolation::kYInverted), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), BoxViolation::kNegativeCoord), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), BoxViolation::kExceedsHeight), v.end());
  EXPECT_FALSE(validate_box({0, 0, std::nan(""), 1}, 4, 4).empty());
}

TEST(ValidateBox, OkImpliesPositiveArea) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> c(-20, 120);
  for (int i = 0; i < 2000; ++i) {
    BoundingBox b{c(rng), c(rng), c(rng), c(rng)};
    if (validate_box(b, 100, 100).empty()) {
      EXPECT_GT(box_area(b), 0.0);
    }
  }
}

TEST(NormalizeLabel, Examples) {
  EXPECT_EQ(std::get<SpeciesLabel>(normalize_label("  Pica pica ")).canonical_name, "Pica pica");
  EXPECT_EQ(std::get<SpeciesLabel>(normalize_label("Pica  pica")).canonical_name, "Pica pica");
  auto flag = normalize_label("no good");
  ASSERT_TRUE(std::holds_alternative<QualityFlag>(flag));
  EXPECT_TRUE(std::holds_alternative<QualityFlag>(normalize_label(" No   GOOD ")));
  EXPECT_THROW(normalize_label("   "), ValidationError);
  EXPECT_THROW(normalize_label(""), ValidationError);
}

TEST(NormalizeLabel, BlankIsReserved) {
  auto b = std::get<SpeciesLabel>(normalize_label("blank"));
  EXPECT_TRUE(b.is_blank);
  EXPECT_EQ(b, SpeciesLabel::blank());
  EXPECT_FALSE(std::get<SpeciesLabel>(normalize_label("Pica pica")).is_blank);
  EXPECT_THROW(species_label("no good"), ValidationError);
}

TEST(NormalizeLabel, Idempotent) {
  std::mt19937 rng(3);
  const std::string alphabet = "ab \t\nXY";
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    int len = 1 + static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) s.push_back(alphabet[rng() % alphabet.size()]);
    NormalizedLabel once;
    try {
      once = normalize_label(s);
    } catch (const ValidationError&) {
      continue;
    }
    if (auto* l = std::get_if<SpeciesLabel>(&once)) {
      EXPECT_EQ(normalize_label(l->canonical_name), once) << '[' << s << ']';
    }
  }
}

TEST(DetectionCheck, RejectsBlankAndBadScores) {
  EXPECT_THROW(check_detection({SpeciesLabel::blank(), 0.9, {0, 0, 1, 1}}), ValidationError);
  EXPECT_THROW(check_detection({species_label("Pica pica"), 1.5, {0, 0, 1, 1}}), ValidationError);
  EXPECT_NO_THROW(check_detection({species_label("Pica pica"), 1.0, {0, 0, 1, 1}}));
}

TEST(Bytes, Base64AndSha256) {
  EXPECT_EQ(base64_encode(as_bytes("hello")), "aGVsbG8=");
  EXPECT_EQ(base64_decode("aGVsbG8="), to_bytes("hello"));
  EXPECT_EQ(base64_decode("aGVs\r\nbG8h"), to_bytes("hello!"));
  EXPECT_EQ(base64_decode(""), Bytes{});
  EXPECT_THROW(base64_decode("abc"), ParseError);
  EXPECT_EQ(sha256_hex(as_bytes("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::mt19937 rng(5);
  for (int n = 0; n < 40; ++n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(base64_decode(base64_encode(b)), b);
  }
}

TEST(Time, Iso8601) {
  auto t = parse_iso8601("2021-03-05T10:00:00Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_iso8601(*t), "2021-03-05T10:00:00Z");
  EXPECT_EQ(to_unix(*t), 1614938400);
  EXPECT_TRUE(parse_iso8601("2021-03-05 10:00:00"));
  EXPECT_FALSE(parse_iso8601("2021-02-30T10:00:00Z"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
}

TEST(SeededRng, DeterministicAndUniformish) {
  SeededRng a(42), b(42);
  EXPECT_EQ(a.sample_indices(100, 10), b.sample_indices(100, 10));
  SeededRng c({42, 1}), d({42, 2});
  EXPECT_NE(c.sample_indices(1000, 20), d.sample_indices(1000, 20));
  SeededRng e(1);
  std::vector<int> hist(4, 0);
  for (int i = 0; i < 40000; ++i) ++hist[e.below(4)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

}  // namespace
}  // namespace trapline
