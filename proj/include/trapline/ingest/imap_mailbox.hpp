#pragma once

// Minimal IMAP4rev1 client for the poller: LOGIN, SELECT, UID SEARCH,
// UID FETCH BODY.PEEK[] and UID STORE. Each mailbox call runs one short
// session. PEEK keeps the server from setting \Seen on fetch, so a message
// only becomes seen once the poller has queued it.

#include <boost/asio.hpp>
#include <boost/asio/ssl.hpp>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trapline/ingest/mailbox.hpp"

namespace trapline::ingest {

struct ImapConfig {
  std::string host;
  std::uint16_t port = 993;
  std::string user;
  std::string password;
  std::string folder = "INBOX";
  bool tls = true;
  bool verify_peer = true;
  Millis timeout{30'000};
  std::string quarantine_keyword = "$Quarantined";
};

/// One untagged response: its text with any literals spliced out and
/// collected separately, in order.
struct ImapResponse {
  std::string text;
  std::vector<std::string> literals;
};

inline std::string imap_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

/// UIDs from a `* SEARCH ...` response.
inline std::vector<std::string> parse_search(const std::vector<ImapResponse>& responses) {
  std::vector<std::string> uids;
  for (const auto& r : responses) {
    std::istringstream in(r.text);
    std::string star, word;
    in >> star >> word;
    if (star != "*" || word != "SEARCH") continue;
    for (std::string uid; in >> uid;) uids.push_back(uid);
  }
  return uids;
}

class ImapSession {
 public:
  explicit ImapSession(const ImapConfig& cfg)
      : cfg_(cfg), ssl_ctx_(boost::asio::ssl::context::tls_client), stream_(io_, ssl_ctx_) {
    namespace asio = boost::asio;
    if (cfg.tls) {
      ssl_ctx_.set_default_verify_paths();
      stream_.set_verify_mode(cfg.verify_peer ? asio::ssl::verify_peer : asio::ssl::verify_none);
      if (cfg.verify_peer) stream_.set_verify_callback(asio::ssl::host_name_verification(cfg.host));
      SSL_set_tlsext_host_name(stream_.native_handle(), cfg.host.c_str());
    }
    asio::ip::tcp::resolver resolver(io_);
    boost::system::error_code ec;
    asio::ip::tcp::resolver::results_type endpoints;
    run([&](auto done) {
      resolver.async_resolve(cfg.host, std::to_string(cfg.port), [&, done](auto e, auto results) {
        ec = e;
        endpoints = results;
        done();
      });
    }, "resolve");
    check(ec, "resolve");
    run([&](auto done) {
      asio::async_connect(stream_.next_layer(), endpoints, [&, done](auto e, auto) {
        ec = e;
        done();
      });
    }, "connect");
    check(ec, "connect");
    if (cfg.tls) {
      run([&](auto done) {
        stream_.async_handshake(asio::ssl::stream_base::client, [&, done](auto e) {
          ec = e;
          done();
        });
      }, "tls handshake");
      check(ec, "tls handshake");
    }
    std::string greeting = read_line();
    if (!greeting.starts_with("* OK") && !greeting.starts_with("* PREAUTH")) {
      throw TransientMailError("imap: unexpected greeting: " + greeting);
    }
    if (!greeting.starts_with("* PREAUTH")) {
      auto [status, text, _] = command("LOGIN " + imap_quote(cfg.user) + " " + imap_quote(cfg.password));
      if (status != "OK") throw AuthError("imap: login rejected: " + text);
    }
    expect_ok("SELECT " + imap_quote(cfg.folder));
  }

  ~ImapSession() {
    try {
      command("LOGOUT");
    } catch (...) {
    }
  }

  struct Reply {
    std::string status;  // OK, NO or BAD
    std::string text;
    std::vector<ImapResponse> untagged;
  };

  Reply command(const std::string& cmd) {
    const std::string tag = "T" + std::to_string(++tag_counter_);
    write(tag + " " + cmd + "\r\n");
    Reply reply;
    for (;;) {
      std::string line = read_line();
      if (line.starts_with(tag + " ")) {
        std::string rest = line.substr(tag.size() + 1);
        auto sp = rest.find(' ');
        reply.status = rest.substr(0, sp);
        reply.text = sp == std::string::npos ? "" : rest.substr(sp + 1);
        return reply;
      }
      ImapResponse r;
      // A line ending in {n} announces n raw bytes, after which the same
      // response continues on the next line.
      for (;;) {
        auto literal = literal_size(line);
        if (!literal) {
          r.text += line;
          break;
        }
        r.text += line.substr(0, line.rfind('{'));
        r.literals.push_back(read_exact(*literal));
        line = read_line();
      }
      reply.untagged.push_back(std::move(r));
    }
  }

  Reply expect_ok(const std::string& cmd) {
    Reply r = command(cmd);
    if (r.status != "OK") throw TransientMailError("imap: " + cmd.substr(0, cmd.find(' ')) + " failed: " + r.text);
    return r;
  }

 private:
  static std::optional<std::size_t> literal_size(const std::string& line) {
    if (line.size() < 3 || line.back() != '}') return std::nullopt;
    auto open = line.rfind('{');
    if (open == std::string::npos) return std::nullopt;
    std::size_t n = 0;
    auto first = line.data() + open + 1, last = line.data() + line.size() - 1;
    auto [p, ec] = std::from_chars(first, last, n);
    if (ec != std::errc{} || p != last) return std::nullopt;
    return n;
  }

  template <typename Start>
  void run(Start start, const char* what) {
    bool finished = false;
    io_.restart();
    start([&finished] { finished = true; });
    io_.run_for(cfg_.timeout);
    if (!finished) {
      boost::system::error_code ignored;
      stream_.next_layer().close(ignored);
      io_.restart();
      io_.run();
      throw TransientMailError(std::string("imap: timeout during ") + what);
    }
  }

  static void check(const boost::system::error_code& ec, const char* what) {
    if (ec) throw TransientMailError(std::string("imap: ") + what + ": " + ec.message());
  }

  void write(const std::string& data) {
    boost::system::error_code ec;
    run([&](auto done) {
      auto handler = [&, done](auto e, std::size_t) {
        ec = e;
        done();
      };
      if (cfg_.tls) {
        boost::asio::async_write(stream_, boost::asio::buffer(data), handler);
      } else {
        boost::asio::async_write(stream_.next_layer(), boost::asio::buffer(data), handler);
      }
    }, "write");
    check(ec, "write");
  }

  std::string read_line() {
    boost::system::error_code ec;
    run([&](auto done) {
      auto handler = [&, done](auto e, std::size_t) {
        ec = e;
        done();
      };
      if (cfg_.tls) {
        boost::asio::async_read_until(stream_, buffer_, "\r\n", handler);
      } else {
        boost::asio::async_read_until(stream_.next_layer(), buffer_, "\r\n", handler);
      }
    }, "read");
    check(ec, "read");
    std::istream in(&buffer_);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::string read_exact(std::size_t n) {
    if (buffer_.size() < n) {
      boost::system::error_code ec;
      const std::size_t need = n - buffer_.size();
      run([&](auto done) {
        auto handler = [&, done](auto e, std::size_t) {
          ec = e;
          done();
        };
        if (cfg_.tls) {
          boost::asio::async_read(stream_, buffer_, boost::asio::transfer_exactly(need), handler);
        } else {
          boost::asio::async_read(stream_.next_layer(), buffer_, boost::asio::transfer_exactly(need), handler);
        }
      }, "read literal");
      check(ec, "read literal");
    }
    std::string out(n, '\0');
    buffer_.sgetn(out.data(), static_cast<std::streamsize>(n));
    return out;
  }

  const ImapConfig& cfg_;
  boost::asio::io_context io_;
  boost::asio::ssl::context ssl_ctx_;
  boost::asio::ssl::stream<boost::asio::ip::tcp::socket> stream_;
  boost::asio::streambuf buffer_;
  int tag_counter_ = 0;
};

class ImapMailbox : public Mailbox {
 public:
  explicit ImapMailbox(ImapConfig cfg) : cfg_(std::move(cfg)) {}

  std::vector<RawMessage> fetch_unseen() override {
    ImapSession s(cfg_);
    auto uids = parse_search(s.expect_ok("UID SEARCH UNSEEN NOT KEYWORD " + cfg_.quarantine_keyword).untagged);
    std::vector<RawMessage> out;
    for (const auto& uid : uids) {
      auto reply = s.expect_ok("UID FETCH " + uid + " BODY.PEEK[]");
      for (auto& r : reply.untagged) {
        if (r.text.find("FETCH") != std::string::npos && !r.literals.empty()) {
          out.push_back({uid, std::move(r.literals.front())});
          break;
        }
      }
    }
    return out;
  }

  void mark_seen(const std::string& uid) override {
    ImapSession s(cfg_);
    s.expect_ok("UID STORE " + uid + " +FLAGS.SILENT (\\Seen)");
  }

  void quarantine(const std::string& uid, const std::string& reason) override {
    ImapSession s(cfg_);
    s.expect_ok("UID STORE " + uid + " +FLAGS.SILENT (\\Seen " + cfg_.quarantine_keyword + ")");
    log::warn("imap", "quarantine_flagged", {{"uid", uid}, {"reason", reason}});
  }

 private:
  ImapConfig cfg_;
};

}  // namespace trapline::ingest
