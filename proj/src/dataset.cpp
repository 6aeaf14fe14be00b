#include "hdglue/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "hdglue/bytes.hpp"
#include "hdglue/error.hpp"

namespace hdglue {

namespace {

constexpr char kHdgeMagic[4] = {'H', 'D', 'G', 'E'};
constexpr std::uint16_t kHdgeVersion = 1;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

EmbeddingDataset::EmbeddingDataset(std::uint32_t d, std::vector<float> values, std::vector<Label> labels,
                                   std::string provenance)
    : d_(d), values_(std::move(values)), labels_(std::move(labels)), provenance_(std::move(provenance)) {
  if (d_ == 0 && !labels_.empty()) throw Error(ErrorKind::kLengthMismatch, "rows of length zero");
  if (values_.size() != labels_.size() * static_cast<std::size_t>(d_)) {
    throw Error(ErrorKind::kLengthMismatch, "value count is not n * d");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorKind::kInvalidValue, "non-finite value in row " + std::to_string(i / d_));
    }
  }
}

std::vector<Label> EmbeddingDataset::classes() const {
  std::set<Label> seen(labels_.begin(), labels_.end());
  return {seen.begin(), seen.end()};
}

void EmbeddingDataset::append(std::span<const float> row, Label label) {
  if (d_ == 0 && labels_.empty()) d_ = static_cast<std::uint32_t>(row.size());
  if (row.size() != d_ || d_ == 0) throw Error(ErrorKind::kLengthMismatch, "row length differs from dataset");
  for (float v : row) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidValue, "non-finite value in row " + std::to_string(labels_.size()));
    }
  }
  values_.insert(values_.end(), row.begin(), row.end());
  labels_.push_back(label);
}

EmbeddingDataset EmbeddingDataset::subset(std::span<const std::size_t> rows) const {
  EmbeddingDataset out;
  out.d_ = d_;
  out.provenance_ = provenance_;
  out.values_.reserve(rows.size() * d_);
  out.labels_.reserve(rows.size());
  for (std::size_t r : rows) {
    auto src = row(r);
    out.values_.insert(out.values_.end(), src.begin(), src.end());
    out.labels_.push_back(labels_.at(r));
  }
  return out;
}

EmbeddingDataset EmbeddingDataset::concat(const EmbeddingDataset& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (other.d_ != d_) throw Error(ErrorKind::kLengthMismatch, "concatenating datasets of different d");
  EmbeddingDataset out = *this;
  out.values_.insert(out.values_.end(), other.values_.begin(), other.values_.end());
  out.labels_.insert(out.labels_.end(), other.labels_.begin(), other.labels_.end());
  return out;
}

DatasetFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::kCsv : DatasetFormat::kBinary;
}

EmbeddingDataset parse_csv_dataset(const std::string& text, std::string provenance) {
  std::string_view rest(text);
  if (rest.size() >= 3 && static_cast<unsigned char>(rest[0]) == 0xEF &&
      static_cast<unsigned char>(rest[1]) == 0xBB && static_cast<unsigned char>(rest[2]) == 0xBF) {
    rest.remove_prefix(3);
  }
  auto next_line = [&rest](std::string_view& line) {
    if (rest.empty()) return false;
    const std::size_t nl = rest.find('\n');
    line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorKind::kFormat, "empty CSV");
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || header[0] != "label") {
    throw Error(ErrorKind::kFormat, "CSV header must be label,e0,...,e{d-1}");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "e" + std::to_string(i - 1)) {
      throw Error(ErrorKind::kFormat, "bad CSV header column '" + std::string(header[i]) + "'");
    }
  }
  const auto d = static_cast<std::uint32_t>(header.size() - 1);

  std::vector<float> values;
  std::vector<Label> labels;
  std::size_t row = 0;
  while (next_line(line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kLengthMismatch, "row " + std::to_string(row) + " has " +
                                                  std::to_string(fields.size() - 1) + " values, expected " +
                                                  std::to_string(d));
    }
    Label label = 0;
    auto [lp, lec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
    if (lec != std::errc{} || lp != fields[0].data() + fields[0].size()) {
      throw Error(ErrorKind::kFormat, "row " + std::to_string(row) + ": bad label '" + std::string(fields[0]) + "'");
    }
    labels.push_back(label);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::string_view f = fields[i];
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      float v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw Error(ErrorKind::kFormat, "row " + std::to_string(row) + ": bad value '" + std::string(fields[i]) + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidValue, "non-finite value in row " + std::to_string(row));
      }
      values.push_back(v);
    }
    ++row;
  }
  return EmbeddingDataset(d, std::move(values), std::move(labels), std::move(provenance));
}

std::string to_csv(const EmbeddingDataset& data) {
  std::string out = "label";
  for (std::uint32_t i = 0; i < data.dim(); ++i) out += ",e" + std::to_string(i);
  out += '\n';
  char buf[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    out += std::to_string(data.label(r));
    for (float v : data.row(r)) {
      // Shortest representation that parses back to the same float.
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ',';
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> to_hdge_bytes(const EmbeddingDataset& data) {
  ByteWriter w;
  w.raw(std::string_view(kHdgeMagic, 4));
  w.u16(kHdgeVersion);
  w.u32(static_cast<std::uint32_t>(data.size()));
  w.u32(data.dim());
  for (float v : data.values()) w.f32(v);
  for (Label l : data.labels()) w.u32(l);
  return w.take();
}

EmbeddingDataset parse_hdge_bytes(std::span<const std::uint8_t> bytes, std::string provenance) {
  ByteReader r(bytes);
  if (r.raw(4) != std::string_view(kHdgeMagic, 4)) throw Error(ErrorKind::kFormat, "bad HDGE magic");
  const std::uint16_t version = r.u16();
  if (version != kHdgeVersion) {
    throw Error(ErrorKind::kFormat, "unsupported HDGE version " + std::to_string(version));
  }
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint64_t expected = (static_cast<std::uint64_t>(n) * d + n) * 4;
  if (r.remaining() != expected) throw Error(ErrorKind::kFormat, "HDGE payload size mismatch");
  std::vector<float> values(static_cast<std::size_t>(n) * d);
  for (float& v : values) v = r.f32();
  std::vector<Label> labels(n);
  for (Label& l : labels) l = r.u32();
  return EmbeddingDataset(d, std::move(values), std::move(labels), std::move(provenance));
}

EmbeddingDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  const auto bytes = read_file_bytes(path);
  if (format == DatasetFormat::kCsv) {
    return parse_csv_dataset(std::string(bytes.begin(), bytes.end()), path.string());
  }
  return parse_hdge_bytes(bytes, path.string());
}

EmbeddingDataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_for_path(path));
}

void save_dataset(const EmbeddingDataset& data, const std::filesystem::path& path, DatasetFormat format) {
  if (format == DatasetFormat::kCsv) {
    write_file_atomic(path, to_csv(data));
  } else {
    write_file_atomic(path, to_hdge_bytes(data));
  }
}

void save_dataset(const EmbeddingDataset& data, const std::filesystem::path& path) {
  save_dataset(data, path, format_for_path(path));
}

}  // namespace hdglue
