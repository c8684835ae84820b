#pragma once

// Just enough RFC 2045/2046 to pull a camera upload apart: headers with
// folding, nested multipart bodies, and base64 / quoted-printable transfer
// encodings. Encoded-word subjects are not decoded.

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/error.hpp"
#include "trapline/ingest/event.hpp"

namespace trapline::ingest {

/// A message the gateway refused; the mailbox moves it aside with `reason`.
class QuarantineError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct MimePart {
  std::map<std::string, std::string> headers;  // lower-cased names
  std::string content_type = "text/plain";     // lower-cased, no parameters
  std::map<std::string, std::string> params;   // content-type parameters
  std::string filename;
  bool attachment = false;
  Bytes body;  // transfer-decoded
  std::vector<MimePart> parts;

  std::string header(const std::string& name) const {
    auto it = headers.find(name);
    return it == headers.end() ? std::string{} : it->second;
  }
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

/// Splits at the first empty line.
inline std::pair<std::string_view, std::string_view> split_head(std::string_view raw) {
  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) return {raw, {}};
    std::string_view line = raw.substr(pos, nl - pos);
    if (line.empty() || line == "\r") return {raw.substr(0, pos), raw.substr(nl + 1)};
    pos = nl + 1;
  }
  return {raw, {}};
}

/// `value; key=val; key="quoted"` into the bare value and its parameters.
inline std::string parse_params(std::string_view field, std::map<std::string, std::string>& params) {
  std::vector<std::string> pieces;
  std::string cur;
  bool quoted = false;
  for (char c : field) {
    if (c == '"') quoted = !quoted;
    if (c == ';' && !quoted) {
      pieces.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  pieces.push_back(cur);
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    auto eq = pieces[i].find('=');
    if (eq == std::string::npos) continue;
    std::string key = lower(trim(std::string_view(pieces[i]).substr(0, eq)));
    std::string_view val = trim(std::string_view(pieces[i]).substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"') val = val.substr(1, val.size() - 2);
    params[key] = std::string(val);
  }
  return lower(trim(pieces[0]));
}

inline Bytes decode_quoted_printable(std::string_view text) {
  Bytes out;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '=') {
      out.push_back(static_cast<std::uint8_t>(text[i]));
      continue;
    }
    if (i + 1 < text.size() && (text[i + 1] == '\n' || text[i + 1] == '\r')) {
      i += (text[i + 1] == '\r' && i + 2 < text.size() && text[i + 2] == '\n') ? 2 : 1;
      continue;
    }
    if (i + 2 < text.size() && hex(text[i + 1]) >= 0 && hex(text[i + 2]) >= 0) {
      out.push_back(static_cast<std::uint8_t>(hex(text[i + 1]) * 16 + hex(text[i + 2])));
      i += 2;
    } else {
      out.push_back('=');
    }
  }
  return out;
}

}  // namespace detail

inline MimePart parse_mime(std::string_view raw, int depth = 0) {
  if (depth > 8) throw ParseError("mime: multipart nesting too deep");
  MimePart part;
  auto [head, body] = detail::split_head(raw);
  std::string name, value;
  auto flush = [&] {
    if (!name.empty()) part.headers[detail::lower(name)] = std::string(detail::trim(value));
    name.clear();
    value.clear();
  };
  for (auto line : detail::split_lines(head)) {
    if (!line.empty() && (line[0] == ' ' || line[0] == '\t')) {
      value += ' ';
      value += detail::trim(line);
      continue;
    }
    flush();
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    name = std::string(detail::trim(line.substr(0, colon)));
    value = std::string(line.substr(colon + 1));
  }
  flush();

  if (auto ct = part.header("content-type"); !ct.empty()) {
    part.content_type = detail::parse_params(ct, part.params);
  }
  std::map<std::string, std::string> disp_params;
  std::string disposition = detail::parse_params(part.header("content-disposition"), disp_params);
  part.attachment = disposition == "attachment";
  if (auto it = disp_params.find("filename"); it != disp_params.end()) {
    part.filename = it->second;
  } else if (auto n = part.params.find("name"); n != part.params.end()) {
    part.filename = n->second;
  }

  if (part.content_type.starts_with("multipart/")) {
    auto b = part.params.find("boundary");
    if (b == part.params.end() || b->second.empty()) throw ParseError("mime: multipart without boundary");
    const std::string open = "--" + b->second;
    const std::string close = open + "--";
    std::string_view rest = body;
    std::size_t start = std::string_view::npos;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto nl = rest.find('\n', pos);
      std::size_t end = nl == std::string_view::npos ? rest.size() : nl;
      std::string_view line = rest.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      line = detail::trim(line);
      if (line == open || line == close) {
        if (start != std::string_view::npos) {
          // The line break before a boundary belongs to the boundary.
          std::size_t stop = pos;
          if (stop > start && rest[stop - 1] == '\n') --stop;
          if (stop > start && rest[stop - 1] == '\r') --stop;
          part.parts.push_back(parse_mime(rest.substr(start, stop - start), depth + 1));
        }
        if (line == close) break;
        start = end + 1;
      }
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    return part;
  }

  const std::string encoding = detail::lower(part.header("content-transfer-encoding"));
  if (encoding == "base64") {
    try {
      part.body = base64_decode(body);
    } catch (const Error& e) {
      throw ParseError(std::string("mime: bad base64 body: ") + e.what());
    }
  } else if (encoding == "quoted-printable") {
    part.body = detail::decode_quoted_printable(body);
  } else {
    part.body.assign(body.begin(), body.end());
  }
  return part;
}

struct RawMessage {
  std::string uid;
  std::string data;
};

namespace detail {

inline void collect_leaves(const MimePart& p, std::vector<const MimePart*>& out) {
  if (p.parts.empty()) {
    out.push_back(&p);
    return;
  }
  for (const auto& c : p.parts) collect_leaves(c, out);
}

}  // namespace detail

/// Camera id from the subject's first token, capture time from a `time=`
/// line in the text body, image from the first image/* part.
inline IngestEvent parse_message(const RawMessage& raw, Timestamp received_at) {
  MimePart root = parse_mime(raw.data);
  std::string subject(detail::trim(root.header("subject")));
  std::string camera_id = subject.substr(0, subject.find_first_of(" \t"));
  if (camera_id.empty()) throw QuarantineError("message " + raw.uid + ": no camera id in subject");

  std::vector<const MimePart*> leaves;
  detail::collect_leaves(root, leaves);
  const MimePart* image = nullptr;
  std::optional<std::string> time_text;
  std::vector<std::string> notes;
  for (const MimePart* leaf : leaves) {
    if (leaf->content_type.starts_with("image/")) {
      if (!image) {
        image = leaf;
      } else {
        notes.push_back("extra attachment ignored: " +
                        (leaf->filename.empty() ? leaf->content_type : leaf->filename));
      }
      continue;
    }
    if (leaf->content_type == "text/plain" && !leaf->attachment) {
      std::string_view text(reinterpret_cast<const char*>(leaf->body.data()), leaf->body.size());
      for (auto line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (!time_text && line.starts_with("time=")) time_text = std::string(detail::trim(line.substr(5)));
      }
      continue;
    }
    if (leaf->attachment) notes.push_back("non-image attachment ignored: " + leaf->filename);
  }
  if (!image) throw QuarantineError("message " + raw.uid + ": no image attachment");
  if (image->body.empty()) throw QuarantineError("message " + raw.uid + ": empty image attachment");

  std::optional<Timestamp> captured;
  if (time_text) captured = parse_iso8601(*time_text);
  if (!captured) {
    notes.push_back(time_text ? "unparseable time '" + *time_text + "', receipt time substituted"
                              : "no time line, receipt time substituted");
  }
  IngestEvent e = make_event(camera_id, captured, image->body, received_at, raw.uid);
  e.notes = std::move(notes);
  return e;
}

}  // namespace trapline::ingest
