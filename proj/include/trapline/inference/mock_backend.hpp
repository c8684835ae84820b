#pragma once

// Deterministic stand-in for the model server. Fixtures are JSON files
// mapping the SHA-256 of image bytes to the detections to return:
//
//   {"<sha256 hex>": [{"label": "Pica pica", "score": 0.91, "box": [...]}], ...}

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "trapline/inference/http_backend.hpp"

namespace trapline::inference {

class MockBackend : public DetectionBackend {
 public:
  MockBackend() = default;

  /// Loads every *.json file in `dir`. A malformed fixture is a startup
  /// error naming the file.
  explicit MockBackend(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error("mock fixtures: not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load(f);
  }

  void load(const std::filesystem::path& file) {
    try {
      auto j = nlohmann::json::parse(read_file_text(file));
      if (!j.is_object()) throw ParseError("top level must be an object");
      for (auto& [hash, dets] : j.items()) {
        if (hash.size() != 64) throw ParseError("key '" + hash + "' is not a sha256 hex digest");
        std::vector<Detection> list;
        for (const auto& d : dets) list.push_back(metrics::detection_from_json(d));
        fixtures_[hash] = std::move(list);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("mock fixture " + file.string() + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("mock fixture " + file.string() + ": " + e.what());
    }
  }

  void add(ByteView image, std::vector<Detection> dets) { fixtures_[sha256_hex(image)] = std::move(dets); }

  /// The next `n` detect calls answer with `status` instead.
  void fail_next(int n, int status = 503) {
    std::lock_guard lock(mu_);
    failures_ = n;
    failure_status_ = status;
  }

  BackendResponse detect(ByteView image, const std::string&) override {
    {
      std::lock_guard lock(mu_);
      ++calls_;
      if (failures_ > 0) {
        --failures_;
        return {classify_status(failure_status_), failure_status_, {}, "injected failure"};
      }
    }
    auto it = fixtures_.find(sha256_hex(image));
    if (it == fixtures_.end()) return {};
    return {CallStatus::kOk, 200, it->second, {}};
  }

  bool ping() override { return true; }

  std::size_t fixture_count() const noexcept { return fixtures_.size(); }
  std::size_t calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  std::map<std::string, std::vector<Detection>> fixtures_;
  std::mutex mu_;
  int failures_ = 0;
  int failure_status_ = 503;
  std::size_t calls_ = 0;
};

/// Serves any DetectionBackend over the HTTP wire protocol. Stoppable and
/// restartable on the same port, for outage drills.
class MockDetectionServer {
 public:
  explicit MockDetectionServer(DetectionBackend& backend) : backend_(backend) {}
  ~MockDetectionServer() { stop(); }

  /// Starts listening; port 0 picks a free port, later restarts reuse it.
  void start(const std::string& host = "127.0.0.1", int port = 0) {
    std::lock_guard lock(mu_);
    if (server_) return;
    host_ = host;
    if (port != 0) port_ = port;
    server_ = std::make_unique<httplib::Server>();
    server_->Post("/v1/detect", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      try {
        auto j = nlohmann::json::parse(req.body);
        Bytes image = base64_decode(j.at("image").get<std::string>());
        auto r = backend_.detect(image, j.value("model", ""));
        res.status = r.http_status == 0 ? 500 : r.http_status;
        if (r.status == CallStatus::kOk) {
          nlohmann::json dets = nlohmann::json::array();
          for (const auto& d : r.detections) dets.push_back(metrics::detection_to_json(d));
          res.set_content(nlohmann::json{{"detections", dets}}.dump(), "application/json");
        } else {
          res.set_content(nlohmann::json{{"error", r.error}}.dump(), "application/json");
        }
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
    server_->Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    if (port_ == 0) {
      port_ = server_->bind_to_any_port(host_);
    } else {
      // A just-stopped listener can linger briefly; retry the bind.
      bool bound = false;
      for (int i = 0; i < 100 && !(bound = server_->bind_to_port(host_, port_)); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      if (!bound) throw Error("mock server: cannot bind port " + std::to_string(port_));
    }
    if (port_ <= 0) throw Error("mock server: cannot bind");
    thread_ = std::thread([s = server_.get()] { s->listen_after_bind(); });
    server_->wait_until_ready();
  }

  void stop() {
    std::unique_ptr<httplib::Server> s;
    std::thread t;
    {
      std::lock_guard lock(mu_);
      s = std::move(server_);
      t = std::move(thread_);
    }
    if (s) s->stop();
    if (t.joinable()) t.join();
  }

  bool running() {
    std::lock_guard lock(mu_);
    return server_ != nullptr;
  }
  int port() const noexcept { return port_; }
  std::string endpoint() const { return "http://" + host_ + ":" + std::to_string(port_); }
  std::size_t requests() const noexcept { return requests_; }

  /// Blocks serving until stop() is called from elsewhere.
  void wait() {
    std::thread t;
    {
      std::lock_guard lock(mu_);
      t = std::move(thread_);
    }
    if (t.joinable()) t.join();
  }

 private:
  DetectionBackend& backend_;
  std::mutex mu_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace trapline::inference
