#pragma once

// Line-delimited JSON interchange of ground truth and detections, one image
// per line:
//
//   {"image_id": "img-001.jpg",
//    "truths": [{"label": "Pica pica", "box": [xmin, ymin, xmax, ymax]}],
//    "detections": [{"label": "Pica pica", "score": 0.91, "box": [...]}]}

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/core/error.hpp"
#include "trapline/metrics/average_precision.hpp"

namespace trapline::metrics {

inline nlohmann::json box_to_json(const BoundingBox& b) {
  return nlohmann::json::array({b.xmin, b.ymin, b.xmax, b.ymax});
}

inline BoundingBox box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("box must be [xmin, ymin, xmax, ymax]");
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError("box coordinates must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline nlohmann::json detection_to_json(const Detection& d) {
  return {{"label", d.label.canonical_name}, {"score", d.score}, {"box", box_to_json(d.box)}};
}

inline Detection detection_from_json(const nlohmann::json& j) {
  Detection d;
  d.label = species_label(j.at("label").get<std::string>());
  d.score = j.at("score").get<double>();
  d.box = box_from_json(j.at("box"));
  check_detection(d);
  return d;
}

inline nlohmann::json image_eval_to_json(const ImageEval& img) {
  nlohmann::json truths = nlohmann::json::array();
  for (const auto& t : img.truths) {
    truths.push_back({{"label", t.label.canonical_name}, {"box", box_to_json(t.box)}});
  }
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : img.detections) dets.push_back(detection_to_json(d));
  return {{"image_id", img.image_id}, {"truths", truths}, {"detections", dets}};
}

inline ImageEval image_eval_from_json(const nlohmann::json& j) {
  ImageEval img;
  img.image_id = j.at("image_id").get<std::string>();
  for (const auto& t : j.value("truths", nlohmann::json::array())) {
    img.truths.push_back({species_label(t.at("label").get<std::string>()), box_from_json(t.at("box"))});
  }
  for (const auto& d : j.value("detections", nlohmann::json::array())) {
    img.detections.push_back(detection_from_json(d));
  }
  return img;
}

inline std::vector<ImageEval> read_image_evals(std::istream& in) {
  std::vector<ImageEval> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(image_eval_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_image_evals(std::ostream& out, const std::vector<ImageEval>& images) {
  for (const auto& img : images) out << image_eval_to_json(img).dump() << '\n';
}

}  // namespace trapline::metrics
