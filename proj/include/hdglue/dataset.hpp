#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hdglue {

using Label = std::uint32_t;

// n x d row-major embeddings (32-bit floats) with integer labels.
class EmbeddingDataset {
 public:
  EmbeddingDataset() = default;
  // Validates shape and finiteness; throws kInvalidValue naming the first bad row.
  EmbeddingDataset(std::uint32_t d, std::vector<float> values, std::vector<Label> labels,
                   std::string provenance = {});

  [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
  [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }
  [[nodiscard]] std::uint32_t dim() const noexcept { return d_; }
  [[nodiscard]] std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values_).subspan(i * d_, d_);
  }
  [[nodiscard]] Label label(std::size_t i) const { return labels_.at(i); }
  [[nodiscard]] std::span<const float> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const Label> labels() const noexcept { return labels_; }
  [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

  // Sorted distinct labels.
  [[nodiscard]] std::vector<Label> classes() const;

  void append(std::span<const float> row, Label label);
  [[nodiscard]] EmbeddingDataset subset(std::span<const std::size_t> rows) const;
  [[nodiscard]] EmbeddingDataset concat(const EmbeddingDataset& other) const;

  friend bool operator==(const EmbeddingDataset& a, const EmbeddingDataset& b) {
    return a.d_ == b.d_ && a.values_ == b.values_ && a.labels_ == b.labels_;
  }

 private:
  std::uint32_t d_ = 0;
  std::vector<float> values_;
  std::vector<Label> labels_;
  std::string provenance_;
};

enum class DatasetFormat { kCsv, kBinary };

// Picks the format from the extension: .csv is CSV, anything else HDGE binary.
DatasetFormat format_for_path(const std::filesystem::path& path);

// CSV: header "label,e0,...,e{d-1}", one example per line.
// Binary (HDGE): "HDGE", u16 version 1, u32 n, u32 d, n*d f32, n u32 labels,
// all little-endian.
EmbeddingDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
EmbeddingDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const EmbeddingDataset& data, const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const EmbeddingDataset& data, const std::filesystem::path& path);

EmbeddingDataset parse_csv_dataset(const std::string& text, std::string provenance = {});
std::string to_csv(const EmbeddingDataset& data);
std::vector<std::uint8_t> to_hdge_bytes(const EmbeddingDataset& data);
EmbeddingDataset parse_hdge_bytes(std::span<const std::uint8_t> bytes, std::string provenance = {});

}  // namespace hdglue
