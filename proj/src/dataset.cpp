#include "dmcca/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dmcca/text.hpp"

namespace dmcca {

Eigen::Index MultisetDataset::total_dim() const {
  Eigen::Index q = 0;
  for (const auto& set : sets) q += set.dim();
  return q;
}

void validate(const MultisetDataset& data) {
  if (data.sets.empty()) throw std::invalid_argument("dataset has no feature sets");
  const Eigen::Index n = data.sets.front().samples();
  for (const auto& set : data.sets) {
    if (set.dim() < 1 || set.samples() < 1)
      throw std::invalid_argument("feature set " + std::to_string(set.set_id) + " is empty");
    if (set.samples() != n)
      throw std::invalid_argument("feature sets disagree on sample count");
    if (!set.values.allFinite())
      throw std::invalid_argument("feature set " + std::to_string(set.set_id) +
                                  " contains non-finite entries");
  }
  if (data.labels.size() != n)
    throw std::invalid_argument("label count does not match sample count");
  if (data.labels.class_count < 1) throw std::invalid_argument("class_count must be positive");
  for (Eigen::Index j = 0; j < n; ++j) {
    const int label = data.labels.labels[j];
    if (label < 0 || label >= data.labels.class_count)
      throw std::invalid_argument("label out of range at sample " + std::to_string(j));
  }
}

namespace {

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && errno == 0;
}

[[noreturn]] void parse_error(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::pair<FeatureMatrix, LabelVector> load_feature_table(const std::string& path,
                                                         int class_count) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature table: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_number = 0;
  std::size_t width = 0;
  bool first_content_line = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() == 1 && cells[0].empty()) continue;

    double label_value = 0.0;
    if (first_content_line && !parse_double(cells[0], label_value)) {
      first_content_line = false;  // header row
      continue;
    }
    first_content_line = false;

    if (width == 0) {
      if (cells.size() < 2) parse_error(path, line_number, "expected a label and at least one feature");
      width = cells.size();
    } else if (cells.size() != width) {
      parse_error(path, line_number,
                  "expected " + std::to_string(width) + " columns, found " +
                      std::to_string(cells.size()));
    }

    if (!parse_double(cells[0], label_value))
      parse_error(path, line_number, "label '" + cells[0] + "' is not numeric");
    const int label = static_cast<int>(label_value);
    if (label_value != static_cast<double>(label) || label < 0)
      parse_error(path, line_number, "label '" + cells[0] + "' is not a non-negative integer");

    std::vector<double> features(width - 1);
    for (std::size_t k = 1; k < width; ++k) {
      if (!parse_double(cells[k], features[k - 1]))
        parse_error(path, line_number, "feature cell '" + cells[k] + "' is not numeric");
    }
    labels.push_back(label);
    rows.push_back(std::move(features));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index m = static_cast<Eigen::Index>(width - 1);
  FeatureMatrix x;
  x.values.resize(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) x.values(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];

  LabelVector lv;
  lv.labels.resize(n);
  int max_label = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    lv.labels[j] = labels[static_cast<std::size_t>(j)];
    max_label = std::max(max_label, lv.labels[j]);
  }
  if (class_count > 0) {
    if (max_label >= class_count)
      throw std::runtime_error(path + ": label " + std::to_string(max_label) +
                               " exceeds declared class count " + std::to_string(class_count));
    lv.class_count = class_count;
  } else {
    lv.class_count = max_label + 1;
  }
  return {std::move(x), std::move(lv)};
}

void write_feature_table(const std::string& path, const FeatureMatrix& x,
                         const LabelVector& labels) {
  if (labels.size() != x.samples())
    throw std::invalid_argument("write_feature_table: label count does not match sample count");
  std::string out;
  out.reserve(static_cast<std::size_t>(x.samples() * (x.dim() + 1)) * 12);
  for (Eigen::Index j = 0; j < x.samples(); ++j) {
    out += std::to_string(labels.labels[j]);
    for (Eigen::Index i = 0; i < x.dim(); ++i) {
      out += ',';
      out += to_string_roundtrip(x.values(i, j));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(const std::string& bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size()) throw std::runtime_error(path + ": truncated IDX header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

}  // namespace

std::pair<ImageStack, LabelVector> load_idx(const std::string& images_path,
                                            const std::string& labels_path) {
  const std::string image_bytes = read_file(images_path);
  if (read_u32_be(image_bytes, 0, images_path) != kIdxImagesMagic)
    throw std::runtime_error(images_path + ": bad IDX image magic");
  const std::uint32_t n = read_u32_be(image_bytes, 4, images_path);
  const std::uint32_t rows = read_u32_be(image_bytes, 8, images_path);
  const std::uint32_t cols = read_u32_be(image_bytes, 12, images_path);
  const std::size_t expected = 16 + std::size_t(n) * rows * cols;
  if (image_bytes.size() < expected)
    throw std::runtime_error(images_path + ": truncated IDX payload");

  const std::string label_bytes = read_file(labels_path);
  if (read_u32_be(label_bytes, 0, labels_path) != kIdxLabelsMagic)
    throw std::runtime_error(labels_path + ": bad IDX label magic");
  const std::uint32_t n_labels = read_u32_be(label_bytes, 4, labels_path);
  if (label_bytes.size() < 8 + std::size_t(n_labels))
    throw std::runtime_error(labels_path + ": truncated IDX payload");
  if (n_labels != n)
    throw std::runtime_error(images_path + ": " + std::to_string(n) + " images but " +
                             std::to_string(n_labels) + " labels");

  ImageStack images;
  images.reserve(n);
  const auto* pixels = reinterpret_cast<const unsigned char*>(image_bytes.data()) + 16;
  for (std::uint32_t k = 0; k < n; ++k) {
    Matrix img(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c)
        img(r, c) = double(pixels[(std::size_t(k) * rows + r) * cols + c]) / 255.0;
    images.push_back(std::move(img));
  }

  LabelVector lv;
  lv.labels.resize(n);
  const auto* raw_labels = reinterpret_cast<const unsigned char*>(label_bytes.data()) + 8;
  int max_label = 0;
  for (std::uint32_t k = 0; k < n; ++k) {
    lv.labels[k] = raw_labels[k];
    max_label = std::max(max_label, lv.labels[k]);
  }
  lv.class_count = max_label + 1;
  return {std::move(images), std::move(lv)};
}

std::pair<MultisetDataset, CenteringStats> center(const MultisetDataset& data) {
  MultisetDataset centered = data;
  CenteringStats stats;
  stats.means.reserve(data.sets.size());
  for (auto& set : centered.sets) {
    Vector mean = set.values.rowwise().mean();
    set.values.colwise() -= mean;
    stats.means.push_back(std::move(mean));
  }
  return {std::move(centered), std::move(stats)};
}

MultisetDataset apply_centering(const CenteringStats& stats, const MultisetDataset& data) {
  if (stats.means.size() != data.sets.size())
    throw std::invalid_argument("centering stats cover " + std::to_string(stats.means.size()) +
                                " sets, dataset has " + std::to_string(data.sets.size()));
  MultisetDataset out = data;
  for (std::size_t i = 0; i < out.sets.size(); ++i) {
    if (stats.means[i].size() != out.sets[i].dim())
      throw std::invalid_argument("centering stats dimension mismatch in set " +
                                  std::to_string(i));
    out.sets[i].values.colwise() -= stats.means[i];
  }
  return out;
}

ClassSums class_sums(const FeatureMatrix& x, const LabelVector& labels) {
  if (labels.size() != x.samples())
    throw std::invalid_argument("class_sums: label count does not match sample count");
  ClassSums s;
  s.sums = Matrix::Zero(x.dim(), labels.class_count);
  for (Eigen::Index j = 0; j < x.samples(); ++j) {
    const int label = labels.labels[j];
    if (label < 0 || label >= labels.class_count)
      throw std::invalid_argument("class_sums: label out of range at sample " + std::to_string(j));
    s.sums.col(label) += x.values.col(j);
  }
  return s;
}

Matrix build_indicator_dense(const LabelVector& labels, Eigen::Index cap) {
  const Eigen::Index n = labels.size();
  if (n > cap)
    throw std::invalid_argument("indicator matrix of order " + std::to_string(n) +
                                " exceeds the dense oracle cap " + std::to_string(cap));
  Matrix a(n, n);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index v = 0; v < n; ++v)
      a(u, v) = labels.labels[u] == labels.labels[v] ? 1.0 : 0.0;
  return a;
}

}  // namespace dmcca
