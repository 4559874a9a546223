#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmcca/cca_family.hpp"
#include "dmcca/classify.hpp"
#include "dmcca/features.hpp"
#include "dmcca/synthetic.hpp"

namespace dmcca {

/// One experiment run: datasets come either from feature tables (one CSV per
/// set) or from an IDX image/label pair per split, in which case the three
/// standard digit feature sets are extracted first.
struct ExperimentConfig {
  std::vector<Method> methods;
  std::vector<std::string> train_tables;
  std::vector<std::string> test_tables;
  std::string train_images, train_labels;
  std::string test_images, test_labels;
  int per_class = 150;  // 0 keeps every sample
  GaborBankSpec gabor;
  ZernikeSpec zernike;
  std::vector<int> d_range;  // empty: 1..retained dimension
  int d_cap = 0;             // nonzero: sweep 1..d_cap instead
  Fusion fusion = Fusion::Sum;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
};

struct ComparisonRow {
  std::string method;
  int best_d = 0;
  double best_accuracy = 0.0;
  int d_max = 0;
};

struct ExperimentResult {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> files;  // everything written, comparison last
};

ExperimentConfig config_from_json_file(const std::string& path);

/// Fits, sweeps and evaluates every configured method, writing per-method
/// sweep CSVs and summaries plus a combined comparison table.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Keeps the first `per_class` samples of each class (0 keeps everything).
std::vector<Eigen::Index> select_per_class(const LabelVector& labels, int per_class);

/// The three digit feature sets: Gabor magnitude mean, Gabor magnitude
/// standard deviation, Zernike moment magnitudes.
MultisetDataset extract_digit_features(const ImageStack& images, const LabelVector& labels,
                                       const GaborBankSpec& gabor, const ZernikeSpec& zernike);

void cmd_extract(const std::string& images_path, const std::string& labels_path,
                 const std::string& out_dir, int per_class, const GaborBankSpec& gabor,
                 const ZernikeSpec& zernike);

void cmd_synth(const SyntheticSpec& spec, const std::string& out_dir);

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

}  // namespace dmcca
