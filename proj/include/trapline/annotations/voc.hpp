#pragma once

// Pascal VOC style annotation documents:
//
//   <annotation>
//     <filename>img.jpg</filename>
//     <size><width>1024</width><height>768</height><depth>3</depth></size>
//     <object>
//       <name>Pica pica</name>
//       <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>110</xmax><ymax>220</ymax></bndbox>
//     </object>
//   </annotation>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"

namespace trapline::annotations {

struct ParsedAnnotation {
  AnnotatedImage image;
  std::vector<std::string> warnings;
};

namespace detail {

namespace pt = boost::property_tree;

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double number(const pt::ptree& node, const std::string& key, const std::string& ctx) {
  auto child = node.get_optional<std::string>(key);
  if (!child) throw ParseError(ctx + ": missing <" + key + ">");
  std::string text = trim(*child);
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(ctx + ": <" + key + "> is not a number: '" + text + "'");
}

inline const std::set<std::string>& known_object_fields() {
  static const std::set<std::string> kFields = {"name",      "pose",     "truncated",
                                                "difficult", "occluded", "bndbox",
                                                "<xmlattr>", "<xmlcomment>"};
  return kFields;
}

}  // namespace detail

/// Parses one annotation document. A missing <size> (or non-positive size)
/// is fatal. Per-object problems become warnings carrying the image name;
/// objects with unknown fields are kept, objects whose box cannot be read
/// are skipped, and boxes that are readable but invalid are kept for
/// filter_unusable to drop.
inline ParsedAnnotation parse_annotation(std::string_view document) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed annotation XML: ") + e.what());
  }
  auto root = tree.get_child_optional("annotation");
  if (!root) throw ParseError("missing <annotation> root element");

  ParsedAnnotation out;
  AnnotatedImage& img = out.image;
  img.image_id = detail::trim(root->get<std::string>("filename", ""));
  const std::string ctx = img.image_id.empty() ? std::string("<unnamed image>") : img.image_id;

  auto size = root->get_child_optional("size");
  if (!size) throw ParseError(ctx + ": missing <size> element");
  double w = detail::number(*size, "width", ctx);
  double h = detail::number(*size, "height", ctx);
  if (!(w > 0) || !(h > 0) || w != static_cast<std::uint32_t>(w) ||
      h != static_cast<std::uint32_t>(h)) {
    throw ParseError(ctx + ": image size must be positive integers");
  }
  img.width = static_cast<std::uint32_t>(w);
  img.height = static_cast<std::uint32_t>(h);

  std::size_t object_index = 0;
  for (const auto& [tag, node] : *root) {
    if (tag != "object") continue;
    const std::string octx = ctx + " object " + std::to_string(object_index++);
    for (const auto& [field, unused] : node) {
      if (!detail::known_object_fields().count(field)) {
        out.warnings.push_back(octx + ": unknown field <" + field + ">");
      }
    }
    std::string raw_name = node.get<std::string>("name", "");
    NormalizedLabel label;
    try {
      label = normalize_label(raw_name);
    } catch (const ValidationError&) {
      out.warnings.push_back(octx + ": empty <name>, object skipped");
      continue;
    }
    if (auto* flag = std::get_if<QualityFlag>(&label)) {
      img.quality_flag = flag->text;
      continue;
    }
    auto bnd = node.get_child_optional("bndbox");
    if (!bnd) {
      out.warnings.push_back(octx + ": missing <bndbox>, object skipped");
      continue;
    }
    BoundingBox box;
    try {
      box = {detail::number(*bnd, "xmin", octx), detail::number(*bnd, "ymin", octx),
             detail::number(*bnd, "xmax", octx), detail::number(*bnd, "ymax", octx)};
    } catch (const ParseError& e) {
      out.warnings.push_back(std::string(e.what()) + ", object skipped");
      continue;
    }
    auto violations = validate_box(box, img.width, img.height);
    for (auto v : violations) out.warnings.push_back(octx + ": invalid box: " + std::string(to_string(v)));
    img.objects.push_back({std::get<SpeciesLabel>(std::move(label)), box});
  }
  return out;
}

inline ParsedAnnotation parse_annotation_file(const std::filesystem::path& path) {
  auto parsed = parse_annotation(read_file_text(path));
  if (parsed.image.image_id.empty()) parsed.image.image_id = path.stem().string() + ".jpg";
  return parsed;
}

}  // namespace trapline::annotations
