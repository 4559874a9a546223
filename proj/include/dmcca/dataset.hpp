#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace dmcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

/// One feature set, m features by n samples (columns are samples).
struct FeatureMatrix {
  Matrix values;
  int set_id = 0;

  Eigen::Index dim() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }
};

/// Integer class labels in [0, class_count), shared by all sets of a dataset.
struct LabelVector {
  IntVector labels;
  int class_count = 0;

  Eigen::Index size() const { return labels.size(); }
};

/// P feature sets over the same n samples with one shared label vector.
struct MultisetDataset {
  std::vector<FeatureMatrix> sets;
  LabelVector labels;

  int set_count() const { return static_cast<int>(sets.size()); }
  Eigen::Index samples() const { return sets.empty() ? 0 : sets.front().samples(); }
  Eigen::Index total_dim() const;
};

/// Per-set feature means recorded at centering time, re-applied to test data.
struct CenteringStats {
  std::vector<Vector> means;
};

/// Per-class column sums of one feature set, m x c. Column l sums the samples
/// of class l, so class-weighted cross-products reduce to S_k * S_m^T.
struct ClassSums {
  Matrix sums;
};

/// Checks shared sample count, label range and label/sample agreement.
void validate(const MultisetDataset& data);

/// Reads a CSV feature table (first column integer label, remaining columns
/// real features, optional single header row). Samples become matrix columns.
/// If class_count is 0 it is inferred as max label + 1.
std::pair<FeatureMatrix, LabelVector> load_feature_table(const std::string& path,
                                                         int class_count = 0);

void write_feature_table(const std::string& path, const FeatureMatrix& x,
                         const LabelVector& labels);

using ImageStack = std::vector<Matrix>;

/// Reads an IDX image/label file pair (big-endian, magic 0x00000803 and
/// 0x00000801). Pixel values are scaled to [0, 1].
std::pair<ImageStack, LabelVector> load_idx(const std::string& images_path,
                                            const std::string& labels_path);

/// Subtracts each feature row's mean; returns the centered dataset and the
/// subtracted means for later test-time application.
std::pair<MultisetDataset, CenteringStats> center(const MultisetDataset& data);

/// Subtracts previously recorded training means; never recomputes them.
MultisetDataset apply_centering(const CenteringStats& stats, const MultisetDataset& data);

ClassSums class_sums(const FeatureMatrix& x, const LabelVector& labels);

/// Dense n x n same-class indicator, A(u,v) = 1 iff labels match. Intended as
/// a small-instance oracle; the fitting path always uses class_sums instead.
Matrix build_indicator_dense(const LabelVector& labels, Eigen::Index cap = 2000);

}  // namespace dmcca
