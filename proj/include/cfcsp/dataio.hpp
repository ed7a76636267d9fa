#pragma once

// On-disk formats. All files are UTF-8 with LF line endings and no BOM;
// writers are byte-stable for identical inputs.
//
// Logit file (one per video/model/stage):
//   line 1: CSPL1,<video_id>,<model_id>,<stage>,<k>,<n>
//   lines 2..n+1: k comma-separated reals (shortest round-trip form)
// where stage is coarse (k=5), negative (k=4) or fine (k=8).
//
// Annotation file (video id taken from the filename):
//   line 1: comma-separated fine class names, in scheme order
//   then one integer per frame in [-1, 7]; -1 marks an unannotated frame.
//
// Prediction file: same shape as an annotation file but labels must be
// valid, [0, 7] — every frame gets a prediction.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cfcsp/cascade.hpp"
#include "cfcsp/detail/kv.hpp"
#include "cfcsp/error.hpp"
#include "cfcsp/smoothing.hpp"
#include "cfcsp/taxonomy.hpp"

namespace cfcsp {

inline constexpr std::string_view kLogitMagic = "CSPL1";

enum class Stage { Coarse, Negative, Fine };

inline std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Coarse: return "coarse";
    case Stage::Negative: return "negative";
    case Stage::Fine: return "fine";
  }
  raise(errc::invalid_input, "unknown stage");
}

inline std::size_t stage_class_count(Stage stage) {
  switch (stage) {
    case Stage::Coarse: return kCoarseCount;
    case Stage::Negative: return kNegativeCount;
    case Stage::Fine: return kFineCount;
  }
  raise(errc::invalid_input, "unknown stage");
}

struct LogitFileHeader {
  std::string video_id;
  std::string model_id;
  Stage stage = Stage::Coarse;
  std::size_t class_count = 0;
  std::size_t frame_count = 0;
};

struct LogitFile {
  LogitFileHeader header;
  VideoLogitStream stream;
};

namespace detail {

inline void append_double(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
}

inline double parse_double(std::string_view cell, const std::string& path,
                           std::size_t line) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path, line, "bad real value '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(path, line,
                     "non-finite value '" + std::string(cell) + "'");
  }
  return value;
}

inline long parse_int(std::string_view cell, const std::string& path,
                      std::size_t line) {
  long value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path, line, "bad integer '" + std::string(cell) + "'");
  }
  return value;
}

inline std::size_t parse_count(std::string_view cell, const std::string& path,
                               std::size_t line) {
  const long v = parse_int(cell, path, line);
  if (v < 0) throw ParseError(path, line, "negative count");
  return static_cast<std::size_t>(v);
}

inline void check_id(std::string_view id, const char* what) {
  if (id.find_first_of(",\n\r") != std::string_view::npos) {
    raise(errc::invalid_input,
          std::string(what) + " '" + std::string(id) +
              "' may not contain commas or line breaks");
  }
}

inline std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) raise(errc::io, "write failed for '" + path.string() + "'");
}

}  // namespace detail

/// Runs `write_fn` against a temporary sibling of `path`, then renames it
/// into place, so readers never observe a half-written file.
template <typename WriteFn>
void atomic_write(const std::filesystem::path& path, WriteFn&& write_fn) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_fn(tmp);
  std::filesystem::rename(tmp, path);
}

inline void write_logits(const std::filesystem::path& path,
                         const VideoLogitStream& stream, Stage stage) {
  validate_stream(stream);
  detail::check_id(stream.video_id, "video_id");
  detail::check_id(stream.model_id, "model_id");
  const std::size_t k = stage_class_count(stage);
  if (!stream.frames.empty() && stream.dim() != k) {
    raise(errc::shape_mismatch,
          "stream has " + std::to_string(stream.dim()) + " classes but stage " +
              std::string(stage_name(stage)) + " expects " + std::to_string(k));
  }
  std::string bytes;
  bytes.reserve(32 + stream.frames.size() * (k * 20 + 2));
  bytes.append(kLogitMagic);
  bytes += ',';
  bytes += stream.video_id;
  bytes += ',';
  bytes += stream.model_id;
  bytes += ',';
  bytes.append(stage_name(stage));
  bytes += ',';
  bytes += std::to_string(k);
  bytes += ',';
  bytes += std::to_string(stream.frames.size());
  bytes += '\n';
  for (const std::vector<double>& frame : stream.frames) {
    for (std::size_t c = 0; c < frame.size(); ++c) {
      if (c > 0) bytes += ',';
      detail::append_double(bytes, frame[c]);
    }
    bytes += '\n';
  }
  detail::write_file(path, bytes);
}

inline LogitFile read_logits(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io, "cannot open '" + path.string() + "'");
  const std::string source = path.string();
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) {
    throw ParseError(source, 1, "missing header line");
  }
  ++lineno;
  line = detail::chomp(std::move(line));
  const std::vector<std::string> fields = detail::split(line, ',');
  if (fields.size() != 6) {
    throw ParseError(source, 1,
                     "header must have 6 fields, found " +
                         std::to_string(fields.size()));
  }
  if (fields[0] != kLogitMagic) {
    throw ParseError(source, 1,
                     "bad magic '" + fields[0] + "' (expected " +
                         std::string(kLogitMagic) + ")");
  }
  LogitFile file;
  file.header.video_id = fields[1];
  file.header.model_id = fields[2];
  if (fields[3] == "coarse") {
    file.header.stage = Stage::Coarse;
  } else if (fields[3] == "negative") {
    file.header.stage = Stage::Negative;
  } else if (fields[3] == "fine") {
    file.header.stage = Stage::Fine;
  } else {
    throw ParseError(source, 1, "unknown stage '" + fields[3] + "'");
  }
  file.header.class_count = detail::parse_count(fields[4], source, 1);
  file.header.frame_count = detail::parse_count(fields[5], source, 1);
  if (file.header.class_count != stage_class_count(file.header.stage)) {
    throw ParseError(source, 1,
                     "class count " + std::to_string(file.header.class_count) +
                         " does not match stage " + fields[3] + " (expected " +
                         std::to_string(stage_class_count(file.header.stage)) +
                         ")");
  }

  file.stream.video_id = file.header.video_id;
  file.stream.model_id = file.header.model_id;
  file.stream.frames.reserve(file.header.frame_count);
  for (std::size_t row = 0; row < file.header.frame_count; ++row) {
    if (!std::getline(in, line)) {
      throw ParseError(source, lineno + 1,
                       "expected " + std::to_string(file.header.frame_count) +
                           " rows, found " + std::to_string(row));
    }
    ++lineno;
    line = detail::chomp(std::move(line));
    const std::vector<std::string> cells = detail::split(line, ',');
    if (cells.size() != file.header.class_count) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(file.header.class_count) +
                           " values, found " + std::to_string(cells.size()));
    }
    std::vector<double> frame(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      frame[c] = detail::parse_double(cells[c], source, lineno);
    }
    file.stream.frames.push_back(std::move(frame));
  }
  if (std::getline(in, line)) {
    throw ParseError(source, lineno + 1,
                     "expected " + std::to_string(file.header.frame_count) +
                         " rows, found more");
  }
  return file;
}

namespace detail {

inline std::vector<int> read_label_file(const std::filesystem::path& path,
                                        const LabelScheme& scheme, int min_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io, "cannot open '" + path.string() + "'");
  const std::string source = path.string();
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) {
    throw ParseError(source, 1, "missing class-name header");
  }
  ++lineno;
  line = chomp(std::move(line));
  const std::vector<std::string> names = split(line, ',');
  const std::vector<std::string>& expected = scheme.fine_names();
  bool match = names.size() == expected.size();
  for (std::size_t i = 0; match && i < names.size(); ++i) {
    match = iequals(trim(names[i]), expected[i]);
  }
  if (!match) {
    throw ParseError(source, 1,
                     "class-name header does not match the scheme's fine "
                     "labels (order matters)");
  }

  std::vector<int> labels;
  const int max_label = static_cast<int>(expected.size()) - 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = chomp(std::move(line));
    if (trim(line).empty()) {
      throw ParseError(source, lineno, "empty label line");
    }
    const long value = parse_int(trim(line), source, lineno);
    if (value < min_label || value > max_label) {
      throw ParseError(source, lineno,
                       "label " + std::to_string(value) + " out of range [" +
                           std::to_string(min_label) + ", " +
                           std::to_string(max_label) + "]");
    }
    labels.push_back(static_cast<int>(value));
  }
  return labels;
}

inline std::string label_file_bytes(std::span<const int> labels,
                                    const LabelScheme& scheme) {
  std::string bytes;
  const std::vector<std::string>& names = scheme.fine_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) bytes += ',';
    bytes += names[i];
  }
  bytes += '\n';
  for (int label : labels) {
    bytes += std::to_string(label);
    bytes += '\n';
  }
  return bytes;
}

}  // namespace detail

/// Annotation labels in [-1, 7]; the header must name the scheme's fine
/// classes in order. The video id is carried by the filename, not the file.
inline std::vector<int> read_annotations(const std::filesystem::path& path,
                                         const LabelScheme& scheme) {
  return detail::read_label_file(path, scheme, -1);
}

inline void write_annotations(const std::filesystem::path& path,
                              std::span<const int> labels,
                              const LabelScheme& scheme) {
  for (int label : labels) {
    if (label < -1 || label >= static_cast<int>(scheme.fine_names().size())) {
      raise(errc::invalid_label,
            "annotation label " + std::to_string(label) + " out of range");
    }
  }
  detail::write_file(path, detail::label_file_bytes(labels, scheme));
}

/// Prediction labels in [0, 7]: every frame must carry a decision.
inline std::vector<int> read_predictions(const std::filesystem::path& path,
                                         const LabelScheme& scheme) {
  return detail::read_label_file(path, scheme, 0);
}

/// Records must be frame-contiguous and sorted; a gap raises a contiguity
/// error. Output is the class-name header plus one label index per line.
inline void write_predictions(const std::filesystem::path& path,
                              std::span<const PredictionRecord> records,
                              const LabelScheme& scheme) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PredictionRecord& record = records[i];
    if (record.label.index < 0 ||
        record.label.index >= static_cast<int>(scheme.fine_names().size())) {
      raise(errc::invalid_label, "record " + std::to_string(i) +
                                     " carries fine label index " +
                                     std::to_string(record.label.index));
    }
    if (i > 0) {
      if (record.video_id != records[0].video_id) {
        raise(errc::alignment,
              "records mix videos '" + records[0].video_id + "' and '" +
                  record.video_id + "'");
      }
      if (record.frame_index != records[i - 1].frame_index + 1) {
        raise(errc::contiguity,
              "frame index gap between " +
                  std::to_string(records[i - 1].frame_index) + " and " +
                  std::to_string(record.frame_index) + " (video '" +
                  record.video_id + "')");
      }
    }
    labels.push_back(record.label.index);
  }
  detail::write_file(path, detail::label_file_bytes(labels, scheme));
}

/// By convention the id of a per-video file is its filename without
/// extension.
inline std::string video_id_from_path(const std::filesystem::path& path) {
  return path.stem().string();
}

}  // namespace cfcsp
