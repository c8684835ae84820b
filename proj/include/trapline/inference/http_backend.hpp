#pragma once

// Backend wire protocol:
//   POST <endpoint>/v1/detect  {"model": "...", "image": "<base64>"}
//     200 -> {"detections": [{"label": "...", "score": 0.9, "box": [x0, y0, x1, y1]}]}
//     429 or 5xx -> retryable, other 4xx -> rejected
//   GET  <endpoint>/v1/health  -> 200 when serving

#include <string>

#include "json.hpp"
#include "trapline/core/http.hpp"
#include "trapline/inference/client.hpp"
#include "trapline/metrics/interchange.hpp"

namespace trapline::inference {

inline nlohmann::json detect_request(ByteView image, const std::string& model) {
  return {{"model", model}, {"image", base64_encode(image)}};
}

/// Decodes a 200 body. Backend labels never carry the Blank class; a
/// response naming it is malformed.
inline std::vector<Detection> parse_detect_response(const std::string& body) {
  std::vector<Detection> out;
  try {
    auto j = nlohmann::json::parse(body);
    for (const auto& d : j.at("detections")) {
      auto det = metrics::detection_from_json(d);
      if (det.label.is_blank) throw ParseError("backend returned the reserved Blank label");
      out.push_back(std::move(det));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed detect response: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("malformed detect response: ") + e.what());
  }
  return out;
}

inline CallStatus classify_status(int status) {
  if (status == 200) return CallStatus::kOk;
  if (status == 429 || status >= 500) return CallStatus::kRetryable;
  return CallStatus::kRejected;
}

class HttpBackend : public DetectionBackend {
 public:
  explicit HttpBackend(const BackendConfig& cfg) : cfg_(cfg) {
    auto scheme_end = cfg.endpoint.find("://");
    auto path_start = cfg.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    host_ = cfg.endpoint.substr(0, path_start);
    if (path_start != std::string::npos) base_path_ = cfg.endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  BackendResponse detect(ByteView image, const std::string& model) override {
    auto cli = client();
    auto res = cli.Post(base_path_ + "/v1/detect", detect_request(image, model).dump(), "application/json");
    BackendResponse out;
    if (!res) {
      out.status = CallStatus::kRetryable;
      out.http_status = 0;
      out.error = "transport: " + httplib::to_string(res.error());
      return out;
    }
    out.http_status = res->status;
    out.status = classify_status(res->status);
    if (out.status != CallStatus::kOk) {
      out.error = "http " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      return out;
    }
    try {
      out.detections = parse_detect_response(res->body);
    } catch (const ParseError& e) {
      out.status = CallStatus::kRejected;
      out.error = e.what();
    }
    return out;
  }

  bool ping() override {
    auto cli = client();
    auto res = cli.Get(base_path_ + "/v1/health");
    return res && res->status == 200;
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(host_);
    auto t = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(cfg_.timeout_s));
    cli.set_connection_timeout(t);
    cli.set_read_timeout(t);
    cli.set_write_timeout(t);
    return cli;
  }

  BackendConfig cfg_;
  std::string host_;
  std::string base_path_;
};

}  // namespace trapline::inference
