#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "trapline/annotations/export.hpp"
#include "trapline/record/crc32c.hpp"
#include "trapline/record/example.hpp"
#include "trapline/record/record_io.hpp"

namespace trapline {
namespace {

using testing::TempDir;

// Bit-at-a-time CRC-32C straight from the polynomial definition; shares no
// code with the table-driven implementation.
std::uint32_t reference_crc32c(ByteView data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (auto byte : data) {
    crc ^= byte;
    for (int k = 0; k < 8; ++k) {
      std::uint32_t lsb = crc & 1u;
      crc >>= 1;
      if (lsb) crc ^= 0x82F63B78u;
    }
  }
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t reference_mask(std::uint32_t c) {
  std::uint64_t rotated = ((c >> 15) | (static_cast<std::uint64_t>(c) << 17)) & 0xFFFFFFFFu;
  return static_cast<std::uint32_t>((rotated + 0xa282ead8u) & 0xFFFFFFFFu);
}

Bytes random_bytes(std::mt19937& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

TEST(Crc32c, KnownVectors) {
  // iSCSI test vectors.
  EXPECT_EQ(crc32c::value(as_bytes("123456789")), 0xE3069283u);
  Bytes zeros(32, 0x00);
  EXPECT_EQ(crc32c::value(zeros), 0x8A9136AAu);
  Bytes ones(32, 0xFF);
  EXPECT_EQ(crc32c::value(ones), 0x62A8AB43u);
  EXPECT_EQ(crc32c::value({}), 0u);
}

TEST(Crc32c, MatchesBitwiseReference) {
  std::mt19937 rng(1);
  for (int i = 0; i < 300; ++i) {
    auto b = random_bytes(rng, rng() % 300);
    EXPECT_EQ(crc32c::value(b), reference_crc32c(b));
    std::size_t cut = b.empty() ? 0 : rng() % b.size();
    EXPECT_EQ(crc32c::extend(crc32c::value({b.data(), cut}), {b.data() + cut, b.size() - cut}),
              crc32c::value(b));
  }
}

TEST(Crc32c, MaskRoundTrip) {
  std::mt19937 rng(2);
  for (int i = 0; i < 1000; ++i) {
    std::uint32_t c = rng();
    EXPECT_EQ(crc32c::mask(c), reference_mask(c));
    EXPECT_EQ(crc32c::unmask(crc32c::mask(c)), c);
  }
}

TEST(RecordIo, EmptyPayloadIsSixteenBytes) {
  TempDir dir;
  auto path = dir / "empty.rec";
  {
    record::RecordWriter w(path);
    w.write({});
    w.close();
  }
  auto raw = read_file_bytes(path);
  ASSERT_EQ(raw.size(), 16u);
  Bytes len_bytes(8, 0);
  EXPECT_TRUE(std::equal(raw.begin(), raw.begin() + 8, len_bytes.begin()));
  auto le32 = [&](std::size_t at) {
    return std::uint32_t{raw[at]} | std::uint32_t{raw[at + 1]} << 8 |
           std::uint32_t{raw[at + 2]} << 16 | std::uint32_t{raw[at + 3]} << 24;
  };
  EXPECT_EQ(le32(8), reference_mask(reference_crc32c(len_bytes)));
  EXPECT_EQ(le32(12), reference_mask(reference_crc32c({})));
  EXPECT_EQ(le32(12), 0xa282ead8u);
  auto back = record::read_records(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].empty());
}

TEST(RecordIo, EmptyFile) {
  TempDir dir;
  auto path = dir / "none.rec";
  record::RecordWriter(path).close();
  EXPECT_EQ(std::filesystem::file_size(path), 0u);
  EXPECT_TRUE(record::read_records(path).empty());
}

TEST(RecordIo, RandomRoundTrip) {
  TempDir dir;
  std::mt19937 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Bytes> payloads;
    std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) payloads.push_back(random_bytes(rng, rng() % 2000));
    auto path = dir / ("rt" + std::to_string(trial) + ".rec");
    record::RecordWriter w(path);
    for (const auto& p : payloads) w.write(p);
    w.close();
    EXPECT_EQ(record::read_records(path), payloads);
  }
}

TEST(RecordIo, EverySingleByteCorruptionDetected) {
  TempDir dir;
  std::mt19937 rng(4);
  auto path = dir / "c.rec";
  std::vector<Bytes> payloads = {random_bytes(rng, 5), random_bytes(rng, 0), random_bytes(rng, 9)};
  {
    record::RecordWriter w(path);
    for (const auto& p : payloads) w.write(p);
  }
  const auto original = read_file_bytes(path);
  for (std::size_t pos = 0; pos < original.size(); ++pos) {
    for (int flip : {0x01, 0x80, 0xFF}) {
      auto bad = original;
      bad[pos] ^= static_cast<std::uint8_t>(flip);
      write_file_text(path, std::string(bad.begin(), bad.end()));
      EXPECT_THROW(record::read_records(path), CorruptRecordError) << "byte " << pos;
    }
  }
}

TEST(RecordIo, PayloadFlipNamesRecordIndex) {
  TempDir dir;
  auto path = dir / "idx.rec";
  {
    record::RecordWriter w(path);
    w.write(to_bytes("first"));
    w.write(to_bytes("second"));
  }
  auto raw = read_file_bytes(path);
  raw[16 + 5 + 12 + 2] ^= 0x10;  // inside "second"
  write_file_text(path, std::string(raw.begin(), raw.end()));
  try {
    record::read_records(path);
    FAIL() << "expected checksum error";
  } catch (const CorruptRecordError& e) {
    EXPECT_EQ(e.index(), 1u);
    EXPECT_NE(std::string(e.what()).find("payload checksum"), std::string::npos);
  }
}

TEST(RecordIo, TruncationDetected) {
  TempDir dir;
  auto path = dir / "t.rec";
  {
    record::RecordWriter w(path);
    w.write(to_bytes("payload bytes"));
  }
  auto raw = read_file_bytes(path);
  for (std::size_t keep = 1; keep < raw.size(); ++keep) {
    write_file_text(path, std::string(raw.begin(), raw.begin() + static_cast<long>(keep)));
    EXPECT_THROW(record::read_records(path), CorruptRecordError) << keep;
  }
}

TEST(ExampleWire, HandEncodedInt64Feature) {
  record::Example ex;
  ex["a"] = record::Int64List{1};
  // Example{features: {feature: {"a": Feature{int64_list: {value: [1]}}}}}
  Bytes expected = {0x0A, 0x0B,                    // Example.features
                    0x0A, 0x09,                    //   Features.feature entry
                    0x0A, 0x01, 'a',               //     key
                    0x12, 0x05,                    //     value: Feature
                    0x1A, 0x03,                    //       int64_list
                    0x0A, 0x01, 0x01};             //         packed [1]
  expected[1] = static_cast<std::uint8_t>(expected.size() - 2);
  expected[3] = static_cast<std::uint8_t>(expected.size() - 4);
  EXPECT_EQ(record::encode_example(ex), expected);
}

TEST(ExampleWire, RoundTrip) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    record::Example ex;
    int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) {
      std::string key = "k" + std::to_string(rng() % 50);
      switch (rng() % 3) {
        case 0: {
          record::BytesList bl;
          for (std::size_t i = rng() % 4; i > 0; --i) bl.push_back(random_bytes(rng, rng() % 40));
          ex[key] = bl;
          break;
        }
        case 1: {
          record::FloatList fl;
          for (std::size_t i = rng() % 5; i > 0; --i) fl.push_back(static_cast<float>(rng()) / 7.0f);
          ex[key] = fl;
          break;
        }
        default: {
          record::Int64List il;
          for (std::size_t i = rng() % 5; i > 0; --i) {
            il.push_back(static_cast<std::int64_t>(static_cast<std::uint64_t>(rng()) << 31) - 77);
          }
          ex[key] = il;
        }
      }
    }
    EXPECT_EQ(record::decode_example(record::encode_example(ex)), ex);
  }
}

TEST(ExportRecords, DetectionExampleRoundTrip) {
  TempDir dir;
  std::vector<AnnotatedImage> images;
  for (int i = 0; i < 5; ++i) {
    AnnotatedImage img;
    img.image_id = "img" + std::to_string(i) + ".jpg";
    img.width = 200;
    img.height = 100;
    img.objects.push_back({species_label("Pica pica"), {20, 10, 120, 60}});
    images.push_back(img);
  }
  auto provider = [](const AnnotatedImage& img) -> std::optional<Bytes> {
    if (img.image_id == "img3.jpg") return std::nullopt;
    return to_bytes("JPEG:" + img.image_id);
  };
  auto path = dir / "out.record";
  auto report = annotations::export_records(images, provider, path);
  EXPECT_EQ(report.written, 4u);
  ASSERT_EQ(report.skipped.size(), 1u);
  EXPECT_EQ(report.skipped[0], "img3.jpg");
  auto payloads = record::read_records(path);
  ASSERT_EQ(payloads.size(), 4u);
  auto ex = record::decode_example(payloads[0]);
  EXPECT_EQ(std::get<record::BytesList>(ex.at("image/encoded"))[0], to_bytes("JPEG:img0.jpg"));
  EXPECT_EQ(std::get<record::Int64List>(ex.at("image/width"))[0], 200);
  EXPECT_EQ(std::get<record::Int64List>(ex.at("image/height"))[0], 100);
  EXPECT_EQ(std::get<record::BytesList>(ex.at("image/object/class/text"))[0], to_bytes("Pica pica"));
  EXPECT_FLOAT_EQ(std::get<record::FloatList>(ex.at("image/object/bbox/xmin"))[0], 0.1f);
  EXPECT_FLOAT_EQ(std::get<record::FloatList>(ex.at("image/object/bbox/xmax"))[0], 0.6f);
  EXPECT_FLOAT_EQ(std::get<record::FloatList>(ex.at("image/object/bbox/ymin"))[0], 0.1f);
  EXPECT_FLOAT_EQ(std::get<record::FloatList>(ex.at("image/object/bbox/ymax"))[0], 0.6f);
}

TEST(ExportRecords, ZeroImagesGivesEmptyFile) {
  TempDir dir;
  auto path = dir / "zero.record";
  auto report = annotations::export_records({}, [](const AnnotatedImage&) { return std::optional<Bytes>{}; },
                                            path);
  EXPECT_EQ(report.written, 0u);
  EXPECT_EQ(std::filesystem::file_size(path), 0u);
}

TEST(ExportRecords, UnwritablePathThrows) {
  EXPECT_THROW(annotations::export_records({}, {}, "/nonexistent-dir/x.record"), Error);
}

}  // namespace
}  // namespace trapline
