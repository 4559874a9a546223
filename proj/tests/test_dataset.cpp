#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <string>

#include "dmcca/dataset.hpp"
#include "dmcca/text.hpp"
#include "test_support.hpp"

using namespace dmcca;

namespace {

std::string write_temp(const std::filesystem::path& dir, const std::string& name,
                       const std::string& content) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

void append_u32_be(std::string& bytes, std::uint32_t value) {
  bytes.push_back(char((value >> 24) & 0xff));
  bytes.push_back(char((value >> 16) & 0xff));
  bytes.push_back(char((value >> 8) & 0xff));
  bytes.push_back(char(value & 0xff));
}

std::string idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                       std::uint32_t magic = 0x00000803) {
  std::string bytes;
  append_u32_be(bytes, magic);
  append_u32_be(bytes, n);
  append_u32_be(bytes, rows);
  append_u32_be(bytes, cols);
  for (std::uint32_t k = 0; k < n * rows * cols; ++k) bytes.push_back(char(k % 256));
  return bytes;
}

std::string idx_labels(std::uint32_t n, std::uint32_t magic = 0x00000801) {
  std::string bytes;
  append_u32_be(bytes, magic);
  append_u32_be(bytes, n);
  for (std::uint32_t k = 0; k < n; ++k) bytes.push_back(char(k % 10));
  return bytes;
}

}  // namespace

TEST_CASE("feature table parsing") {
  const auto dir = testsupport::temp_dir("feature_table");

  SUBCASE("two rows, two features") {
    const auto path = write_temp(dir, "plain.csv", "0,1.5,2.0\n1,0.5,1.0\n");
    auto [x, labels] = load_feature_table(path);
    CHECK(x.dim() == 2);
    CHECK(x.samples() == 2);
    CHECK(x.values(0, 0) == 1.5);
    CHECK(x.values(1, 1) == 1.0);
    CHECK(labels.labels[0] == 0);
    CHECK(labels.labels[1] == 1);
    CHECK(labels.class_count == 2);
  }

  SUBCASE("header row skipped when first cell is non-numeric") {
    const auto path = write_temp(dir, "header.csv", "label,f1,f2\n0,1.5,2.0\n1,0.5,1.0\n");
    auto [x, labels] = load_feature_table(path);
    CHECK(x.samples() == 2);
    CHECK(labels.class_count == 2);
  }

  SUBCASE("ragged row cites its line number") {
    const auto path = write_temp(dir, "ragged.csv", "0,1.5,2.0\n0,1.5\n");
    CHECK_THROWS_WITH_AS(load_feature_table(path), doctest::Contains(":2"), std::runtime_error);
  }

  SUBCASE("non-numeric feature cell") {
    const auto path = write_temp(dir, "bad_cell.csv", "0,oops,2.0\n");
    CHECK_THROWS_AS(load_feature_table(path), std::runtime_error);
  }

  SUBCASE("negative label") {
    const auto path = write_temp(dir, "bad_label.csv", "-1,1.0,2.0\n");
    CHECK_THROWS_AS(load_feature_table(path), std::runtime_error);
  }

  SUBCASE("declared class count rejects larger labels") {
    const auto path = write_temp(dir, "declared.csv", "0,1.0\n7,2.0\n");
    CHECK_THROWS_AS(load_feature_table(path, 5), std::runtime_error);
    auto [x, labels] = load_feature_table(path, 10);
    CHECK(labels.class_count == 10);
  }

  SUBCASE("write/load round trip") {
    std::mt19937_64 rng(7);
    FeatureMatrix x{testsupport::gaussian_matrix(3, 11, rng), 0};
    LabelVector labels = testsupport::random_labels(11, 4, rng);
    const auto path = (dir / "roundtrip.csv").string();
    write_feature_table(path, x, labels);
    auto [loaded, loaded_labels] = load_feature_table(path);
    CHECK(loaded.values == x.values);
    CHECK(loaded_labels.labels == labels.labels);
  }
}

TEST_CASE("idx loading") {
  const auto dir = testsupport::temp_dir("idx");

  SUBCASE("ten images and labels") {
    const auto images = write_temp(dir, "img", idx_images(10, 2, 2));
    const auto labels = write_temp(dir, "lab", idx_labels(10));
    auto [stack, lv] = load_idx(images, labels);
    CHECK(stack.size() == 10);
    CHECK(stack[0].rows() == 2);
    CHECK(stack[0].cols() == 2);
    CHECK(lv.size() == 10);
    CHECK(stack[0](0, 0) == 0.0);
    CHECK(stack[0](0, 1) == doctest::Approx(1.0 / 255.0));
    CHECK(lv.labels[3] == 3);
  }

  SUBCASE("bad magic") {
    const auto images = write_temp(dir, "img_bad", idx_images(2, 2, 2, 0x00000802));
    const auto labels = write_temp(dir, "lab_ok", idx_labels(2));
    CHECK_THROWS_AS(load_idx(images, labels), std::runtime_error);
  }

  SUBCASE("count mismatch") {
    const auto images = write_temp(dir, "img10", idx_images(10, 2, 2));
    const auto labels = write_temp(dir, "lab9", idx_labels(9));
    CHECK_THROWS_AS(load_idx(images, labels), std::runtime_error);
  }

  SUBCASE("truncated payload") {
    auto bytes = idx_images(4, 3, 3);
    bytes.resize(bytes.size() - 5);
    const auto images = write_temp(dir, "img_trunc", bytes);
    const auto labels = write_temp(dir, "lab4", idx_labels(4));
    CHECK_THROWS_AS(load_idx(images, labels), std::runtime_error);
  }
}

TEST_CASE("centering") {
  MultisetDataset data;
  data.sets.push_back({Matrix{{1.0, 3.0}}, 0});
  data.labels.labels = IntVector{{0, 1}};
  data.labels.class_count = 2;

  auto [centered, stats] = center(data);
  CHECK(centered.sets[0].values(0, 0) == -1.0);
  CHECK(centered.sets[0].values(0, 1) == 1.0);
  CHECK(stats.means[0][0] == 2.0);

  SUBCASE("already centered data is unchanged") {
    auto [again, stats2] = center(centered);
    CHECK(again.sets[0].values == centered.sets[0].values);
    CHECK(stats2.means[0][0] == 0.0);
  }

  SUBCASE("apply_centering uses stored training means") {
    MultisetDataset test;
    test.sets.push_back({Matrix{{4.0}}, 0});
    test.labels.labels = IntVector{{0}};
    test.labels.class_count = 2;
    const MultisetDataset shifted = apply_centering(stats, test);
    CHECK(shifted.sets[0].values(0, 0) == 2.0);
  }

  SUBCASE("zero stats is the identity") {
    CenteringStats zero;
    zero.means.push_back(Vector::Zero(1));
    const MultisetDataset same = apply_centering(zero, data);
    CHECK(same.sets[0].values == data.sets[0].values);
  }

  SUBCASE("set count mismatch is an error") {
    MultisetDataset three;
    for (int i = 0; i < 3; ++i) three.sets.push_back({Matrix{{1.0}}, i});
    CHECK_THROWS_AS(apply_centering(stats, three), std::invalid_argument);
  }

  SUBCASE("centered rows sum to zero relative to their scale") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      auto dataset = testsupport::random_dataset({4, 7}, 23, 3, rng);
      dataset.sets[0].values.array() += 5.0;  // uncentered on purpose
      auto [c, s] = center(dataset);
      for (const auto& set : c.sets)
        for (Eigen::Index i = 0; i < set.dim(); ++i) {
          const double scale = set.values.row(i).cwiseAbs().sum();
          CHECK(std::abs(set.values.row(i).sum()) <= 1e-10 * scale);
        }
    }
  }
}

TEST_CASE("class sums") {
  SUBCASE("column sums per class") {
    FeatureMatrix x{Matrix{{1.0, 2.0, 3.0}}, 0};
    LabelVector labels{IntVector{{0, 0, 1}}, 2};
    const ClassSums s = class_sums(x, labels);
    CHECK(s.sums(0, 0) == 3.0);
    CHECK(s.sums(0, 1) == 3.0);
  }

  SUBCASE("empty class gives a zero column") {
    FeatureMatrix x{Matrix{{1.0, 2.0, 3.0}}, 0};
    LabelVector labels{IntVector{{0, 0, 1}}, 3};
    const ClassSums s = class_sums(x, labels);
    CHECK(s.sums(0, 2) == 0.0);
  }

  SUBCASE("factorization matches the dense indicator oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 10 + Eigen::Index(rng() % 41);  // <= 50
      const int c = 2 + int(rng() % 4);
      const LabelVector labels = testsupport::random_labels(n, c, rng);
      const FeatureMatrix x{testsupport::gaussian_matrix(3, n, rng), 0};
      const FeatureMatrix y{testsupport::gaussian_matrix(5, n, rng), 1};
      const Matrix a = build_indicator_dense(labels);
      const Matrix via_indicator = x.values * a * y.values.transpose();
      const Matrix via_sums = class_sums(x, labels).sums * class_sums(y, labels).sums.transpose();
      const double scale = via_indicator.cwiseAbs().maxCoeff();
      CHECK((via_indicator - via_sums).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    }
  }

  SUBCASE("invariant under a consistent sample permutation") {
    std::mt19937_64 rng(5);
    const Eigen::Index n = 17;
    const LabelVector labels = testsupport::random_labels(n, 3, rng);
    const FeatureMatrix x{testsupport::gaussian_matrix(4, n, rng), 0};

    std::vector<Eigen::Index> order(n);
    for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    for (Eigen::Index j = n - 1; j > 0; --j)
      std::swap(order[static_cast<std::size_t>(j)],
                order[static_cast<std::size_t>(rng() % std::uint64_t(j + 1))]);

    FeatureMatrix xp{Matrix(4, n), 0};
    LabelVector lp{IntVector(n), labels.class_count};
    for (Eigen::Index j = 0; j < n; ++j) {
      xp.values.col(j) = x.values.col(order[static_cast<std::size_t>(j)]);
      lp.labels[j] = labels.labels[order[static_cast<std::size_t>(j)]];
    }
    const Matrix base = class_sums(x, labels).sums;
    const Matrix permuted = class_sums(xp, lp).sums;
    // Summation order changes, so allow rounding noise.
    CHECK((base - permuted).cwiseAbs().maxCoeff() <= 1e-12 * base.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("dense indicator") {
  SUBCASE("marks same-label pairs") {
    const LabelVector labels{IntVector{{0, 1, 0}}, 2};
    Matrix expected{{1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}};
    CHECK(build_indicator_dense(labels) == expected);
  }

  SUBCASE("rank equals the number of non-empty classes") {
    const LabelVector labels{IntVector{{0, 0, 1, 1, 2}}, 3};
    const Matrix a = build_indicator_dense(labels);
    Eigen::FullPivLU<Matrix> lu(a);
    CHECK(lu.rank() == 3);
    CHECK(lu.rank() <= labels.class_count);

    const LabelVector gappy{IntVector{{0, 0, 2, 2}}, 4};
    Eigen::FullPivLU<Matrix> lu2(build_indicator_dense(gappy));
    CHECK(lu2.rank() == 2);
  }

  SUBCASE("class-contiguous ordering gives all-ones blocks") {
    const LabelVector labels{IntVector{{0, 0, 1}}, 2};
    Matrix expected{{1.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    CHECK(build_indicator_dense(labels) == expected);
  }

  SUBCASE("oracle cap") {
    LabelVector labels;
    labels.class_count = 1;
    labels.labels = IntVector::Zero(10);
    CHECK_THROWS_AS(build_indicator_dense(labels, 5), std::invalid_argument);
  }
}
