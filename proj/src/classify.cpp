#include "dmcca/classify.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

#include "dmcca/text.hpp"

namespace dmcca {

IntVector nn_classify(const Matrix& train, const IntVector& train_labels, const Matrix& test) {
  if (train.cols() == 0) throw std::invalid_argument("nn_classify: empty training set");
  if (train_labels.size() != train.cols())
    throw std::invalid_argument("nn_classify: training label count mismatch");
  if (test.rows() != train.rows())
    throw std::invalid_argument("nn_classify: feature dimensions differ (train " +
                                std::to_string(train.rows()) + ", test " +
                                std::to_string(test.rows()) + ")");

  // argmin_i ||t_i - s_j||^2 = argmin_i ||t_i||^2 - 2 t_i . s_j; the shared
  // ||s_j||^2 term cannot change the winner. Scanning i in order makes the
  // smallest-index tie-break exact.
  const Vector train_sq = train.colwise().squaredNorm();
  const Matrix cross = train.transpose() * test;  // N x M

  IntVector predicted(test.cols());
  for (Eigen::Index j = 0; j < test.cols(); ++j) {
    Eigen::Index best = 0;
    double best_score = train_sq[0] - 2.0 * cross(0, j);
    for (Eigen::Index i = 1; i < train.cols(); ++i) {
      const double score = train_sq[i] - 2.0 * cross(i, j);
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
    predicted[j] = train_labels[best];
  }
  return predicted;
}

double evaluate_accuracy(const IntVector& predicted, const IntVector& truth) {
  if (predicted.size() == 0) throw std::invalid_argument("evaluate_accuracy: empty input");
  if (predicted.size() != truth.size())
    throw std::invalid_argument("evaluate_accuracy: length mismatch");
  Eigen::Index correct = 0;
  for (Eigen::Index j = 0; j < predicted.size(); ++j)
    if (predicted[j] == truth[j]) ++correct;
  return double(correct) / double(predicted.size());
}

namespace {

std::vector<Matrix> truncate_rows(const std::vector<Matrix>& projected, int d) {
  std::vector<Matrix> out;
  out.reserve(projected.size());
  for (const auto& y : projected) out.push_back(y.topRows(d));
  return out;
}

}  // namespace

SweepResult sweep_dimensions(const MultisetDataset& train, const MultisetDataset& test,
                             MethodSpec method, const std::vector<int>& d_range,
                             CouplingOptions options) {
  const ProjectionModel model = fit(train, method, std::nullopt, options);

  std::vector<int> dims = d_range;
  if (dims.empty()) {
    dims.resize(static_cast<std::size_t>(model.d));
    for (int d = 1; d <= model.d; ++d) dims[static_cast<std::size_t>(d) - 1] = d;
  } else {
    std::vector<int> unique;
    for (int d : dims) {
      if (d < 1)
        throw std::invalid_argument("sweep dimension must be positive");
      if (d > model.d_max)
        throw std::invalid_argument("sweep dimension " + std::to_string(d) +
                                    " exceeds the predicted bound " +
                                    std::to_string(model.d_max));
      if (d > model.d)
        throw std::runtime_error("sweep dimension " + std::to_string(d) + " exceeds the " +
                                 std::to_string(model.d) + " retained eigenvectors");
      if (std::find(unique.begin(), unique.end(), d) == unique.end()) unique.push_back(d);
    }
    dims = std::move(unique);
  }

  const std::vector<Matrix> train_full = project(model, train);
  const std::vector<Matrix> test_full = project(model, test);

  SweepResult result;
  result.method = method;
  result.d_max = model.d_max;
  result.entries.reserve(dims.size());
  for (int d : dims) {
    const FusedFeatures fused_train =
        fuse(truncate_rows(train_full, d), method.fusion, train.labels);
    const FusedFeatures fused_test = fuse(truncate_rows(test_full, d), method.fusion, test.labels);
    const IntVector predicted = nn_classify(fused_train, fused_test);
    result.entries.emplace_back(d, evaluate_accuracy(predicted, test.labels.labels));
  }

  result.best_d = result.entries.front().first;
  result.best_accuracy = result.entries.front().second;
  for (const auto& [d, accuracy] : result.entries) {
    if (accuracy > result.best_accuracy ||
        (accuracy == result.best_accuracy && d < result.best_d)) {
      result.best_accuracy = accuracy;
      result.best_d = d;
    }
  }
  return result;
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::string out = "d,accuracy\n";
  for (const auto& [d, accuracy] : result.entries) {
    out += std::to_string(d);
    out += ',';
    out += to_string_roundtrip(accuracy);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_sweep_summary_json(const std::string& path, const SweepResult& result) {
  nlohmann::json doc;
  doc["method"] = to_string(result.method.kind);
  doc["best_d"] = result.best_d;
  doc["best_accuracy"] = result.best_accuracy;
  doc["d_max"] = result.d_max;
  write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace dmcca
