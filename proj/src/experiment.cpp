#include "dmcca/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <stdexcept>

#include "dmcca/model_io.hpp"
#include "dmcca/text.hpp"

namespace dmcca {

using nlohmann::json;

namespace {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + stage + ": " + e.what());
  }
}

MultisetDataset load_tables(const std::vector<std::string>& paths, int class_count) {
  MultisetDataset data;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto [x, labels] = load_feature_table(paths[i], class_count);
    x.set_id = static_cast<int>(i);
    if (i == 0) {
      data.labels = labels;
    } else if (labels.labels != data.labels.labels) {
      throw std::runtime_error("label column of " + paths[i] +
                               " disagrees with the first set");
    }
    data.sets.push_back(std::move(x));
  }
  validate(data);
  return data;
}

SweepResult evaluate_serial(const MultisetDataset& train, const MultisetDataset& test,
                            Fusion fusion) {
  auto [centered_train, stats] = center(train);
  const FusedFeatures fused_train = serial_fuse(centered_train);
  const FusedFeatures fused_test = serial_fuse(apply_centering(stats, test));
  const IntVector predicted = nn_classify(fused_train, fused_test);
  const double accuracy = evaluate_accuracy(predicted, test.labels.labels);

  SweepResult result;
  result.method = MethodSpec{Method::Serial, fusion};
  const int q = static_cast<int>(train.total_dim());
  result.entries = {{q, accuracy}};
  result.best_d = q;
  result.best_accuracy = accuracy;
  result.d_max = predicted_dim_bound(train);
  return result;
}

}  // namespace

std::vector<Eigen::Index> select_per_class(const LabelVector& labels, int per_class) {
  std::vector<Eigen::Index> kept;
  if (per_class <= 0) {
    kept.resize(static_cast<std::size_t>(labels.size()));
    for (Eigen::Index j = 0; j < labels.size(); ++j) kept[static_cast<std::size_t>(j)] = j;
    return kept;
  }
  std::vector<int> counts(static_cast<std::size_t>(labels.class_count), 0);
  for (Eigen::Index j = 0; j < labels.size(); ++j) {
    auto& count = counts[static_cast<std::size_t>(labels.labels[j])];
    if (count < per_class) {
      ++count;
      kept.push_back(j);
    }
  }
  return kept;
}

MultisetDataset extract_digit_features(const ImageStack& images, const LabelVector& labels,
                                       const GaborBankSpec& gabor, const ZernikeSpec& zernike) {
  if (images.size() != static_cast<std::size_t>(labels.size()))
    throw std::invalid_argument("image/label count mismatch");
  const Eigen::Index n = static_cast<Eigen::Index>(images.size());

  MultisetDataset data;
  data.labels = labels;
  data.sets.resize(3);
  data.sets[0] = {Matrix(gabor.filter_count(), n), 0};
  data.sets[1] = {Matrix(gabor.filter_count(), n), 1};
  data.sets[2] = {Matrix(zernike.feature_count(), n), 2};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix& image = images[static_cast<std::size_t>(j)];
    data.sets[0].values.col(j) = gabor_features(image, gabor, GaborStat::Mean);
    data.sets[1].values.col(j) = gabor_features(image, gabor, GaborStat::Std);
    data.sets[2].values.col(j) = zernike_features(image, zernike);
  }
  return data;
}

void cmd_extract(const std::string& images_path, const std::string& labels_path,
                 const std::string& out_dir, int per_class, const GaborBankSpec& gabor,
                 const ZernikeSpec& zernike) {
  auto [images, labels] = run_stage("load-idx", [&] { return load_idx(images_path, labels_path); });

  const std::vector<Eigen::Index> kept = select_per_class(labels, per_class);
  ImageStack selected;
  selected.reserve(kept.size());
  LabelVector selected_labels;
  selected_labels.class_count = labels.class_count;
  selected_labels.labels.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    selected.push_back(images[static_cast<std::size_t>(kept[k])]);
    selected_labels.labels[static_cast<Eigen::Index>(k)] = labels.labels[kept[k]];
  }

  const MultisetDataset data = run_stage("extract-features", [&] {
    return extract_digit_features(selected, selected_labels, gabor, zernike);
  });

  namespace fs = std::filesystem;
  run_stage("write-features", [&] {
    write_feature_table((fs::path(out_dir) / "gabor_mean.csv").string(), data.sets[0], data.labels);
    write_feature_table((fs::path(out_dir) / "gabor_std.csv").string(), data.sets[1], data.labels);
    write_feature_table((fs::path(out_dir) / "zernike.csv").string(), data.sets[2], data.labels);
    return 0;
  });
}

void cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  const SyntheticData data = run_stage("synthesize", [&] { return make_synthetic(spec); });
  namespace fs = std::filesystem;
  run_stage("write-features", [&] {
    for (int i = 0; i < spec.set_count; ++i) {
      const std::string suffix = std::to_string(i) + ".csv";
      write_feature_table((fs::path(out_dir) / ("train" + suffix)).string(),
                          data.train.sets[static_cast<std::size_t>(i)], data.train.labels);
      write_feature_table((fs::path(out_dir) / ("test" + suffix)).string(),
                          data.test.sets[static_cast<std::size_t>(i)], data.test.labels);
    }
    return 0;
  });
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
  std::string out = "method,best_d,best_accuracy,d_max\n";
  for (const auto& row : rows) {
    out += row.method;
    out += ',';
    out += std::to_string(row.best_d);
    out += ',';
    out += to_string_roundtrip(row.best_accuracy);
    out += ',';
    out += std::to_string(row.d_max);
    out += '\n';
  }
  write_file_atomic(path, out);
}

ExperimentConfig config_from_json_file(const std::string& path) {
  const json doc = json::parse(read_file(path));
  ExperimentConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "methods") {
      for (const auto& name : value) config.methods.push_back(method_from_string(name.get<std::string>()));
    } else if (key == "train") {
      config.train_tables = value.get<std::vector<std::string>>();
    } else if (key == "test") {
      config.test_tables = value.get<std::vector<std::string>>();
    } else if (key == "train_images") {
      config.train_images = value.get<std::string>();
    } else if (key == "train_labels") {
      config.train_labels = value.get<std::string>();
    } else if (key == "test_images") {
      config.test_images = value.get<std::string>();
    } else if (key == "test_labels") {
      config.test_labels = value.get<std::string>();
    } else if (key == "per_class") {
      config.per_class = value.get<int>();
    } else if (key == "d_max") {
      config.d_cap = value.get<int>();
    } else if (key == "fusion") {
      config.fusion = fusion_from_string(value.get<std::string>());
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      config.out_dir = value.get<std::string>();
    } else {
      throw std::runtime_error(path + ": unknown config key '" + key + "'");
    }
  }
  return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("no methods configured");

  MultisetDataset train, test;
  const bool idx_inputs = !config.train_images.empty();
  if (idx_inputs) {
    auto [train_stack, train_labels] =
        run_stage("load-idx-train", [&] { return load_idx(config.train_images, config.train_labels); });
    auto [test_stack, test_labels] =
        run_stage("load-idx-test", [&] { return load_idx(config.test_images, config.test_labels); });

    const auto keep_train = select_per_class(train_labels, config.per_class);
    const auto keep_test = select_per_class(test_labels, config.per_class);
    ImageStack train_sel, test_sel;
    LabelVector train_lab{{}, train_labels.class_count}, test_lab{{}, train_labels.class_count};
    train_lab.labels.resize(static_cast<Eigen::Index>(keep_train.size()));
    test_lab.labels.resize(static_cast<Eigen::Index>(keep_test.size()));
    for (std::size_t k = 0; k < keep_train.size(); ++k) {
      train_sel.push_back(train_stack[static_cast<std::size_t>(keep_train[k])]);
      train_lab.labels[static_cast<Eigen::Index>(k)] = train_labels.labels[keep_train[k]];
    }
    for (std::size_t k = 0; k < keep_test.size(); ++k) {
      test_sel.push_back(test_stack[static_cast<std::size_t>(keep_test[k])]);
      test_lab.labels[static_cast<Eigen::Index>(k)] = test_labels.labels[keep_test[k]];
    }
    train = run_stage("extract-features", [&] {
      return extract_digit_features(train_sel, train_lab, config.gabor, config.zernike);
    });
    test = run_stage("extract-features", [&] {
      return extract_digit_features(test_sel, test_lab, config.gabor, config.zernike);
    });
  } else {
    if (config.train_tables.empty() || config.test_tables.empty())
      throw std::invalid_argument("config needs train/test feature tables or IDX paths");
    if (config.train_tables.size() != config.test_tables.size())
      throw std::invalid_argument("train and test must list the same number of sets");
    train = run_stage("load-train", [&] { return load_tables(config.train_tables, 0); });
    test = run_stage("load-test",
                     [&] { return load_tables(config.test_tables, train.labels.class_count); });
  }

  std::vector<int> d_range = config.d_range;
  if (d_range.empty() && config.d_cap > 0) {
    for (int d = 1; d <= config.d_cap; ++d) d_range.push_back(d);
  }

  namespace fs = std::filesystem;
  ExperimentResult result;
  for (Method kind : config.methods) {
    const std::string name = to_string(kind);
    const SweepResult sweep = run_stage("method " + name, [&] {
      if (kind == Method::Serial) return evaluate_serial(train, test, config.fusion);
      return sweep_dimensions(train, test, MethodSpec{kind, config.fusion}, d_range);
    });

    const std::string csv_path = (fs::path(config.out_dir) / (name + "_sweep.csv")).string();
    const std::string json_path = (fs::path(config.out_dir) / (name + "_summary.json")).string();
    run_stage("write-results", [&] {
      write_sweep_csv(csv_path, sweep);
      write_sweep_summary_json(json_path, sweep);
      return 0;
    });
    result.files.push_back(csv_path);
    result.files.push_back(json_path);
    result.rows.push_back({name, sweep.best_d, sweep.best_accuracy, sweep.d_max});
  }

  const std::string comparison_path = (fs::path(config.out_dir) / "comparison.csv").string();
  run_stage("write-results", [&] {
    write_comparison_csv(comparison_path, result.rows);
    return 0;
  });
  result.files.push_back(comparison_path);
  return result;
}

}  // namespace dmcca
