#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapline/core/bytes.hpp"
#include "trapline/core/domain.hpp"
#include "trapline/record/example.hpp"
#include "trapline/record/record_io.hpp"

namespace trapline::annotations {

/// Resolves an image to its encoded bytes; nullopt when unavailable.
using ImageBytesProvider = std::function<std::optional<Bytes>(const AnnotatedImage&)>;

struct ExportReport {
  std::size_t written = 0;
  std::vector<std::string> skipped;  // image ids whose bytes could not be resolved
};

/// Writes one detection example per resolvable image. Unresolvable images
/// are skipped and reported; I/O failures throw.
inline ExportReport export_records(std::span<const AnnotatedImage> images,
                                   const ImageBytesProvider& provider,
                                   const std::filesystem::path& path) {
  ExportReport report;
  record::RecordWriter writer(path);
  for (const auto& img : images) {
    std::optional<Bytes> bytes;
    try {
      bytes = provider(img);
    } catch (const std::exception&) {
      bytes.reset();
    }
    if (!bytes) {
      report.skipped.push_back(img.image_id);
      continue;
    }
    writer.write(record::encode_example(record::make_detection_example(img, *bytes)));
  }
  writer.close();
  report.written = writer.count();
  return report;
}

/// Looks images up by file name inside `dir`.
inline ImageBytesProvider directory_provider(std::filesystem::path dir) {
  return [dir = std::move(dir)](const AnnotatedImage& img) -> std::optional<Bytes> {
    auto p = dir / img.image_id;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) return std::nullopt;
    return read_file_bytes(p);
  };
}

}  // namespace trapline::annotations
