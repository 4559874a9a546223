#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dmcca/cca_family.hpp"
#include "dmcca/dataset.hpp"

namespace dmcca {

/// 1-nearest-neighbor by Euclidean distance over fused feature columns.
/// Distance ties go to the smallest training index.
IntVector nn_classify(const Matrix& train, const IntVector& train_labels, const Matrix& test);

inline IntVector nn_classify(const FusedFeatures& train, const FusedFeatures& test) {
  return nn_classify(train.values, train.labels.labels, test.values);
}

/// Fraction of positions where predicted == truth.
double evaluate_accuracy(const IntVector& predicted, const IntVector& truth);

/// Accuracy as a function of the projected dimension d.
struct SweepResult {
  MethodSpec method;
  std::vector<std::pair<int, double>> entries;  // (d, accuracy)
  int best_d = 0;           // smallest d attaining best_accuracy
  double best_accuracy = 0.0;
  int d_max = 0;            // predicted bound for the training set
};

/// Fits once at the full retained dimension, then scores each requested d by
/// truncating to the leading eigenvectors (they are nested, so this matches
/// refitting at d). Empty d_range means 1..model.d.
SweepResult sweep_dimensions(const MultisetDataset& train, const MultisetDataset& test,
                             MethodSpec method, const std::vector<int>& d_range = {},
                             CouplingOptions options = {});

/// "d,accuracy" rows, one per sweep entry.
void write_sweep_csv(const std::string& path, const SweepResult& result);

/// {method, best_d, best_accuracy, d_max} summary document.
void write_sweep_summary_json(const std::string& path, const SweepResult& result);

}  // namespace dmcca
