#pragma once

// Key/value training example serialised in protocol-buffer wire format:
//
//   message Example   { Features features = 1; }
//   message Features  { map<string, Feature> feature = 1; }
//   message Feature   { oneof kind { BytesList bytes_list = 1;
//                                    FloatList float_list = 2;
//                                    Int64List int64_list = 3; } }
//   message BytesList { repeated bytes value = 1; }
//   message FloatList { repeated float value = 1 [packed = true]; }
//   message Int64List { repeated int64 value = 1 [packed = true]; }
//
// Map entries are written in ascending key order so output is deterministic.

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"

namespace trapline::record {

using BytesList = std::vector<Bytes>;
using FloatList = std::vector<float>;
using Int64List = std::vector<std::int64_t>;
using Feature = std::variant<BytesList, FloatList, Int64List>;
using Example = std::map<std::string, Feature>;

namespace wire {

inline void put_varint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_tag(Bytes& out, int field, int wire_type) {
  put_varint(out, static_cast<std::uint64_t>(field) << 3 | static_cast<std::uint64_t>(wire_type));
}

inline void put_len_delimited(Bytes& out, int field, ByteView payload) {
  put_tag(out, field, 2);
  put_varint(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
}

class Cursor {
 public:
  explicit Cursor(ByteView data) : data_(data) {}

  bool done() const { return pos_ >= data_.size(); }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) throw ParseError("truncated varint");
      std::uint8_t b = data_[pos_++];
      v |= std::uint64_t{static_cast<std::uint8_t>(b & 0x7F)} << shift;
      if (!(b & 0x80)) return v;
    }
    throw ParseError("varint too long");
  }

  ByteView take(std::size_t n) {
    if (n > data_.size() - pos_) throw ParseError("truncated field");
    ByteView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }

  ByteView len_delimited() { return take(static_cast<std::size_t>(varint())); }

  void skip(int wire_type) {
    switch (wire_type) {
      case 0: varint(); break;
      case 1: take(8); break;
      case 2: len_delimited(); break;
      case 5: take(4); break;
      default: throw ParseError("unsupported wire type " + std::to_string(wire_type));
    }
  }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

inline float decode_float(ByteView b) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i) u |= std::uint32_t{b[i]} << (8 * i);
  return std::bit_cast<float>(u);
}

}  // namespace wire

inline Bytes encode_feature(const Feature& f) {
  Bytes list;
  int field = 0;
  if (const auto* bl = std::get_if<BytesList>(&f)) {
    field = 1;
    for (const auto& v : *bl) wire::put_len_delimited(list, 1, v);
  } else if (const auto* fl = std::get_if<FloatList>(&f)) {
    field = 2;
    if (!fl->empty()) {
      Bytes packed;
      for (float x : *fl) {
        auto u = std::bit_cast<std::uint32_t>(x);
        for (int i = 0; i < 4; ++i) packed.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
      }
      wire::put_len_delimited(list, 1, packed);
    }
  } else {
    field = 3;
    const auto& il = std::get<Int64List>(f);
    if (!il.empty()) {
      Bytes packed;
      for (auto x : il) wire::put_varint(packed, static_cast<std::uint64_t>(x));
      wire::put_len_delimited(list, 1, packed);
    }
  }
  Bytes out;
  wire::put_len_delimited(out, field, list);
  return out;
}

inline Bytes encode_example(const Example& ex) {
  Bytes features;
  for (const auto& [key, feature] : ex) {
    Bytes entry;
    wire::put_len_delimited(entry, 1, as_bytes(key));
    wire::put_len_delimited(entry, 2, encode_feature(feature));
    wire::put_len_delimited(features, 1, entry);
  }
  Bytes out;
  wire::put_len_delimited(out, 1, features);
  return out;
}

inline Feature decode_feature(ByteView data) {
  wire::Cursor c(data);
  Feature result = BytesList{};
  while (!c.done()) {
    auto tag = c.varint();
    int field = static_cast<int>(tag >> 3);
    int wt = static_cast<int>(tag & 7);
    if (wt != 2 || field < 1 || field > 3) {
      c.skip(wt);
      continue;
    }
    wire::Cursor list(c.len_delimited());
    if (field == 1) {
      BytesList bl;
      while (!list.done()) {
        auto t = list.varint();
        if ((t >> 3) == 1 && (t & 7) == 2) {
          auto v = list.len_delimited();
          bl.emplace_back(v.begin(), v.end());
        } else {
          list.skip(static_cast<int>(t & 7));
        }
      }
      result = std::move(bl);
    } else if (field == 2) {
      FloatList fl;
      while (!list.done()) {
        auto t = list.varint();
        if ((t >> 3) == 1 && (t & 7) == 2) {
          auto packed = list.len_delimited();
          if (packed.size() % 4 != 0) throw ParseError("packed float list length");
          for (std::size_t i = 0; i < packed.size(); i += 4) {
            fl.push_back(wire::decode_float(packed.subspan(i, 4)));
          }
        } else if ((t >> 3) == 1 && (t & 7) == 5) {
          fl.push_back(wire::decode_float(list.take(4)));
        } else {
          list.skip(static_cast<int>(t & 7));
        }
      }
      result = std::move(fl);
    } else {
      Int64List il;
      while (!list.done()) {
        auto t = list.varint();
        if ((t >> 3) == 1 && (t & 7) == 2) {
          wire::Cursor packed(list.len_delimited());
          while (!packed.done()) il.push_back(static_cast<std::int64_t>(packed.varint()));
        } else if ((t >> 3) == 1 && (t & 7) == 0) {
          il.push_back(static_cast<std::int64_t>(list.varint()));
        } else {
          list.skip(static_cast<int>(t & 7));
        }
      }
      result = std::move(il);
    }
  }
  return result;
}

inline Example decode_example(ByteView data) {
  Example ex;
  wire::Cursor top(data);
  while (!top.done()) {
    auto tag = top.varint();
    if (tag != ((1 << 3) | 2)) {
      top.skip(static_cast<int>(tag & 7));
      continue;
    }
    wire::Cursor features(top.len_delimited());
    while (!features.done()) {
      auto ft = features.varint();
      if (ft != ((1 << 3) | 2)) {
        features.skip(static_cast<int>(ft & 7));
        continue;
      }
      wire::Cursor entry(features.len_delimited());
      std::string key;
      Feature value = BytesList{};
      while (!entry.done()) {
        auto et = entry.varint();
        if (et == ((1 << 3) | 2)) {
          auto k = entry.len_delimited();
          key.assign(k.begin(), k.end());
        } else if (et == ((2 << 3) | 2)) {
          value = decode_feature(entry.len_delimited());
        } else {
          entry.skip(static_cast<int>(et & 7));
        }
      }
      ex[key] = std::move(value);
    }
  }
  return ex;
}

namespace keys {
inline constexpr const char* kEncoded = "image/encoded";
inline constexpr const char* kWidth = "image/width";
inline constexpr const char* kHeight = "image/height";
inline constexpr const char* kClassText = "image/object/class/text";
inline constexpr const char* kXmin = "image/object/bbox/xmin";
inline constexpr const char* kXmax = "image/object/bbox/xmax";
inline constexpr const char* kYmin = "image/object/bbox/ymin";
inline constexpr const char* kYmax = "image/object/bbox/ymax";
}  // namespace keys

/// Builds the detection-training example for one image. Box coordinates are
/// normalised to [0,1] by the image dimensions.
inline Example make_detection_example(const AnnotatedImage& image, ByteView encoded) {
  if (image.width == 0 || image.height == 0) throw ValidationError("image has zero size");
  BytesList classes;
  FloatList xmin, xmax, ymin, ymax;
  const double w = image.width;
  const double h = image.height;
  for (const auto& obj : image.objects) {
    classes.push_back(to_bytes(obj.label.canonical_name));
    xmin.push_back(static_cast<float>(obj.box.xmin / w));
    xmax.push_back(static_cast<float>(obj.box.xmax / w));
    ymin.push_back(static_cast<float>(obj.box.ymin / h));
    ymax.push_back(static_cast<float>(obj.box.ymax / h));
  }
  Example ex;
  ex[keys::kEncoded] = BytesList{Bytes(encoded.begin(), encoded.end())};
  ex[keys::kWidth] = Int64List{static_cast<std::int64_t>(image.width)};
  ex[keys::kHeight] = Int64List{static_cast<std::int64_t>(image.height)};
  ex[keys::kClassText] = std::move(classes);
  ex[keys::kXmin] = std::move(xmin);
  ex[keys::kXmax] = std::move(xmax);
  ex[keys::kYmin] = std::move(ymin);
  ex[keys::kYmax] = std::move(ymax);
  return ex;
}

}  // namespace trapline::record
