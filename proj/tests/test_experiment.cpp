#include <doctest.h>

#include <cmath>
#include <fstream>

#include "dmcca/experiment.hpp"
#include "dmcca/text.hpp"
#include "test_support.hpp"

using namespace dmcca;

namespace {

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.set_count = 3;
  spec.class_count = 4;
  spec.n_train = 80;
  spec.n_test = 40;
  spec.dims = {6, 7, 8};
  spec.seed = seed;
  return spec;
}

std::vector<std::string> table_paths(const std::filesystem::path& dir, const std::string& prefix,
                                     int sets) {
  std::vector<std::string> paths;
  for (int i = 0; i < sets; ++i)
    paths.push_back((dir / (prefix + std::to_string(i) + ".csv")).string());
  return paths;
}

}  // namespace

TEST_CASE("synthetic generator") {
  SUBCASE("declared shapes and balanced labels") {
    SyntheticSpec spec;  // P=3, c=6, m=(20,20,30), 300/120
    const SyntheticData data = make_synthetic(spec);
    CHECK(data.train.set_count() == 3);
    CHECK(data.train.samples() == 300);
    CHECK(data.test.samples() == 120);
    CHECK(data.train.sets[2].dim() == 30);
    CHECK(data.train.labels.class_count == 6);
    std::vector<int> counts(6, 0);
    for (Eigen::Index j = 0; j < data.train.samples(); ++j)
      ++counts[std::size_t(data.train.labels.labels[j])];
    for (int count : counts) CHECK(count == 50);
  }

  SUBCASE("seed-deterministic") {
    const SyntheticData a = make_synthetic(small_spec(9));
    const SyntheticData b = make_synthetic(small_spec(9));
    for (int i = 0; i < 3; ++i)
      CHECK(a.train.sets[std::size_t(i)].values == b.train.sets[std::size_t(i)].values);
    const SyntheticData c = make_synthetic(small_spec(10));
    CHECK(a.train.sets[0].values != c.train.sets[0].values);
  }

  SUBCASE("zero noise and wide separation solve the task outright") {
    SyntheticSpec spec = small_spec(0);
    spec.separation = 10.0;
    spec.noise = 0.0;
    const SyntheticData data = make_synthetic(spec);
    const SweepResult result =
        sweep_dimensions(data.train, data.test, {Method::Dmcca, Fusion::Sum});
    CHECK(result.best_accuracy == 1.0);
    CHECK(result.best_d <= spec.class_count - 1);
  }

  SUBCASE("without a shared signal the cross-set correlation sits at the noise floor") {
    SyntheticSpec spec = small_spec(1);
    spec.separation = 0.0;
    spec.shared_strength = 0.0;
    spec.noise = 1.0;
    auto [centered, stats] = center(make_synthetic(spec).train);
    const Matrix& x0 = centered.sets[0].values;
    const Matrix& x1 = centered.sets[1].values;
    const double observed = (x0 * x1.transpose()).norm();

    // Permutation null for the same statistic.
    std::mt19937_64 rng(123);
    const Eigen::Index n = x1.cols();
    Matrix shuffled = x1;
    double mean = 0.0, mean_sq = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      for (Eigen::Index j = n - 1; j > 0; --j) {
        const Eigen::Index k = Eigen::Index(rng() % std::uint64_t(j + 1));
        shuffled.col(j).swap(shuffled.col(k));
      }
      const double value = (x0 * shuffled.transpose()).norm();
      mean += value;
      mean_sq += value * value;
    }
    mean /= trials;
    const double sd = std::sqrt(std::max(0.0, mean_sq / trials - mean * mean));
    CHECK(observed <= mean + 3.0 * sd);

    // Sanity: an actual shared signal pushes the statistic far out of the null.
    SyntheticSpec strong = spec;
    strong.shared_strength = 2.0;
    auto [centered2, stats2] = center(make_synthetic(strong).train);
    const double with_signal =
        (centered2.sets[0].values * centered2.sets[1].values.transpose()).norm();
    CHECK(with_signal > mean + 3.0 * sd);
  }
}

TEST_CASE("synth command writes loadable tables") {
  const auto dir = testsupport::temp_dir("synth_cmd");
  SyntheticSpec spec;  // defaults: P=3, c=6, m=(20,20,30), 300/120
  cmd_synth(spec, dir.string());

  for (int i = 0; i < 3; ++i) {
    auto [train, train_labels] =
        load_feature_table((dir / ("train" + std::to_string(i) + ".csv")).string());
    auto [test, test_labels] =
        load_feature_table((dir / ("test" + std::to_string(i) + ".csv")).string());
    CHECK(train.dim() == spec.dims[std::size_t(i)]);
    CHECK(train.samples() == 300);
    CHECK(test.samples() == 120);
    CHECK(train_labels.class_count == 6);
  }

  SUBCASE("byte-identical on rerun") {
    const auto again = testsupport::temp_dir("synth_cmd_again");
    cmd_synth(spec, again.string());
    for (int i = 0; i < 3; ++i) {
      const std::string name = "train" + std::to_string(i) + ".csv";
      CHECK(read_file((dir / name).string()) == read_file((again / name).string()));
    }
  }
}

TEST_CASE("extract command") {
  const auto dir = testsupport::temp_dir("extract_cmd");

  // Tiny IDX pair: 10 images, 28x28, labels 0..9.
  std::string images_bytes, labels_bytes;
  auto push_u32 = [](std::string& bytes, std::uint32_t value) {
    bytes.push_back(char((value >> 24) & 0xff));
    bytes.push_back(char((value >> 16) & 0xff));
    bytes.push_back(char((value >> 8) & 0xff));
    bytes.push_back(char(value & 0xff));
  };
  push_u32(images_bytes, 0x00000803);
  push_u32(images_bytes, 10);
  push_u32(images_bytes, 28);
  push_u32(images_bytes, 28);
  std::mt19937_64 rng(77);
  for (int k = 0; k < 10 * 28 * 28; ++k) images_bytes.push_back(char(rng() % 256));
  push_u32(labels_bytes, 0x00000801);
  push_u32(labels_bytes, 10);
  for (int k = 0; k < 10; ++k) labels_bytes.push_back(char(k));

  const auto images_path = (dir / "images.idx").string();
  const auto labels_path = (dir / "labels.idx").string();
  {
    std::ofstream(images_path, std::ios::binary) << images_bytes;
    std::ofstream(labels_path, std::ios::binary) << labels_bytes;
  }

  const auto out = dir / "features";
  cmd_extract(images_path, labels_path, out.string(), 150, GaborBankSpec{}, ZernikeSpec{});

  auto count_columns = [](const std::string& path) {
    const std::string text = read_file(path);
    const std::string first_line = text.substr(0, text.find('\n'));
    return 1 + std::count(first_line.begin(), first_line.end(), ',');
  };
  CHECK(count_columns((out / "gabor_mean.csv").string()) == 25);
  CHECK(count_columns((out / "gabor_std.csv").string()) == 25);
  CHECK(count_columns((out / "zernike.csv").string()) == 37);
  auto [x, labels] = load_feature_table((out / "zernike.csv").string());
  CHECK(x.samples() == 10);

  SUBCASE("deterministic output bytes") {
    const auto out2 = dir / "features2";
    cmd_extract(images_path, labels_path, out2.string(), 150, GaborBankSpec{}, ZernikeSpec{});
    for (const char* name : {"gabor_mean.csv", "gabor_std.csv", "zernike.csv"})
      CHECK(read_file((out / name).string()) == read_file((out2 / name).string()));
  }

  SUBCASE("missing labels file names the path") {
    CHECK_THROWS_WITH_AS(
        cmd_extract(images_path, (dir / "absent.idx").string(), out.string(), 0, GaborBankSpec{},
                    ZernikeSpec{}),
        doctest::Contains("absent.idx"), std::runtime_error);
  }

  SUBCASE("per-class selection keeps the first occurrences") {
    LabelVector lv;
    lv.class_count = 2;
    lv.labels = IntVector{{0, 0, 1, 0, 1, 1}};
    const auto kept = select_per_class(lv, 2);
    CHECK(kept == std::vector<Eigen::Index>{0, 1, 2, 4});
    CHECK(select_per_class(lv, 0).size() == 6);
  }
}

TEST_CASE("experiment runner") {
  const auto dir = testsupport::temp_dir("runner");
  SyntheticSpec spec = small_spec(4);
  cmd_synth(spec, dir.string());

  ExperimentConfig config;
  config.methods = {Method::Serial, Method::Mcca, Method::Dmcca};
  config.train_tables = table_paths(dir, "train", 3);
  config.test_tables = table_paths(dir, "test", 3);
  config.out_dir = (dir / "out").string();

  const ExperimentResult result = run_experiment(config);
  REQUIRE(result.rows.size() == 3);
  CHECK(result.rows[0].method == "serial");
  CHECK(result.rows[1].method == "mcca");
  CHECK(result.rows[2].method == "dmcca");
  CHECK(result.rows[2].best_d <= result.rows[2].d_max);

  SUBCASE("comparison best accuracy equals the sweep maximum") {
    const std::string sweep_text = read_file((dir / "out" / "dmcca_sweep.csv").string());
    double best = 0.0;
    std::size_t pos = sweep_text.find('\n') + 1;
    while (pos < sweep_text.size()) {
      const std::size_t comma = sweep_text.find(',', pos);
      const std::size_t end = sweep_text.find('\n', pos);
      best = std::max(best, std::stod(sweep_text.substr(comma + 1, end - comma - 1)));
      pos = end + 1;
    }
    CHECK(result.rows[2].best_accuracy == best);
  }

  SUBCASE("reruns are byte-identical") {
    ExperimentConfig second = config;
    second.out_dir = (dir / "out2").string();
    run_experiment(second);
    for (const char* name :
         {"serial_sweep.csv", "mcca_sweep.csv", "dmcca_sweep.csv", "comparison.csv",
          "dmcca_summary.json"})
      CHECK(read_file((dir / "out" / name).string()) == read_file((dir / "out2" / name).string()));
  }

  SUBCASE("d cap limits the sweep range") {
    ExperimentConfig capped = config;
    capped.methods = {Method::Dmcca};
    capped.d_cap = 2;
    capped.out_dir = (dir / "capped").string();
    const ExperimentResult limited = run_experiment(capped);
    const std::string text = read_file((dir / "capped" / "dmcca_sweep.csv").string());
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + 2 rows
    CHECK(limited.rows[0].best_d <= 2);
  }

  SUBCASE("config file round trip with flag overrides") {
    const auto config_path = dir / "config.json";
    std::ofstream(config_path) << R"({
      "methods": ["serial", "dmcca"],
      "train": [")" << config.train_tables[0]
                                << R"(", ")" << config.train_tables[1] << R"(", ")"
                                << config.train_tables[2] << R"("],
      "test": [")" << config.test_tables[0]
                                << R"(", ")" << config.test_tables[1] << R"(", ")"
                                << config.test_tables[2] << R"("],
      "fusion": "concat",
      "seed": 7,
      "out": ")" << (dir / "from_config").string()
                                << R"("
    })";
    const ExperimentConfig loaded = config_from_json_file(config_path.string());
    CHECK(loaded.methods.size() == 2);
    CHECK(loaded.fusion == Fusion::Concat);
    CHECK(loaded.seed == 7);
    const ExperimentResult from_config = run_experiment(loaded);
    CHECK(from_config.rows.size() == 2);
  }

  SUBCASE("unknown config keys are rejected") {
    const auto bad_path = dir / "bad.json";
    std::ofstream(bad_path) << R"({"methodz": ["dmcca"]})";
    CHECK_THROWS_WITH_AS(config_from_json_file(bad_path.string()), doctest::Contains("methodz"),
                         std::runtime_error);
  }

  SUBCASE("failures name the failing stage") {
    ExperimentConfig broken = config;
    broken.train_tables[0] = (dir / "missing.csv").string();
    CHECK_THROWS_WITH_AS(run_experiment(broken), doctest::Contains("stage load-train"),
                         std::runtime_error);
  }
}

TEST_CASE("experiment runner on IDX inputs") {
  const auto dir = testsupport::temp_dir("runner_idx");

  auto push_u32 = [](std::string& bytes, std::uint32_t value) {
    bytes.push_back(char((value >> 24) & 0xff));
    bytes.push_back(char((value >> 16) & 0xff));
    bytes.push_back(char((value >> 8) & 0xff));
    bytes.push_back(char(value & 0xff));
  };
  // Class-dependent blob images so the fitted projections carry signal.
  auto write_pair = [&](const std::string& prefix, int n) {
    std::string images, labels;
    push_u32(images, 0x00000803);
    push_u32(images, std::uint32_t(n));
    push_u32(images, 28);
    push_u32(images, 28);
    push_u32(labels, 0x00000801);
    push_u32(labels, std::uint32_t(n));
    std::mt19937_64 rng(prefix.size());
    for (int k = 0; k < n; ++k) {
      const int label = k % 4;
      const double cx = 7.0 + 4.0 * label;
      for (int r = 0; r < 28; ++r)
        for (int c = 0; c < 28; ++c) {
          const double v =
              255.0 * std::exp(-((r - 14.0) * (r - 14.0) + (c - cx) * (c - cx)) / 12.0);
          images.push_back(char(int(v + double(rng() % 16)) & 0xff));
        }
      labels.push_back(char(label));
    }
    std::ofstream((dir / (prefix + "-images.idx")).string(), std::ios::binary) << images;
    std::ofstream((dir / (prefix + "-labels.idx")).string(), std::ios::binary) << labels;
  };
  write_pair("train", 48);
  write_pair("test", 20);

  ExperimentConfig config;
  config.methods = {Method::Serial, Method::Dmcca};
  config.train_images = (dir / "train-images.idx").string();
  config.train_labels = (dir / "train-labels.idx").string();
  config.test_images = (dir / "test-images.idx").string();
  config.test_labels = (dir / "test-labels.idx").string();
  config.per_class = 10;
  config.out_dir = (dir / "out").string();

  const ExperimentResult result = run_experiment(config);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].method == "serial");
  CHECK(result.rows[0].best_d == 24 + 24 + 36);
  CHECK(result.rows[1].method == "dmcca");
  CHECK(result.rows[1].d_max == 4);
  CHECK(result.rows[1].best_d <= 4);
  CHECK(std::filesystem::exists(dir / "out" / "comparison.csv"));
}
