#include "dmcca/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dmcca {

namespace {

/// Box-Muller on explicit engine draws; std::normal_distribution is
/// implementation-defined and would not pin the byte-identical contract.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const double u1 = (double(engine_()) + 1.0) / (double(engine_.max()) + 2.0);
    const double u2 = double(engine_()) / (double(engine_.max()) + 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = next();
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

void check_spec(const SyntheticSpec& spec) {
  if (spec.set_count < 2) throw std::invalid_argument("synthetic spec needs at least 2 sets");
  if (spec.class_count < 2) throw std::invalid_argument("synthetic spec needs at least 2 classes");
  if (spec.n_train < 1 || spec.n_test < 1)
    throw std::invalid_argument("synthetic sample counts must be positive");
  if (static_cast<int>(spec.dims.size()) != spec.set_count)
    throw std::invalid_argument("synthetic spec needs one dimension per set");
  for (int m : spec.dims)
    if (m < 1) throw std::invalid_argument("synthetic set dimensions must be positive");
}

MultisetDataset draw_split(const SyntheticSpec& spec, const std::vector<Matrix>& class_means,
                           const std::vector<Matrix>& loadings, int latent_rank, int n,
                           GaussianSource& rng) {
  MultisetDataset data;
  data.labels.class_count = spec.class_count;
  data.labels.labels.resize(n);
  data.sets.resize(static_cast<std::size_t>(spec.set_count));
  for (int i = 0; i < spec.set_count; ++i) {
    data.sets[static_cast<std::size_t>(i)].set_id = i;
    data.sets[static_cast<std::size_t>(i)].values.resize(spec.dims[static_cast<std::size_t>(i)], n);
  }

  Vector latent(latent_rank);
  for (int j = 0; j < n; ++j) {
    const int label = j % spec.class_count;
    data.labels.labels[j] = label;
    for (int k = 0; k < latent_rank; ++k) latent[k] = rng.next();
    for (int i = 0; i < spec.set_count; ++i) {
      auto& set = data.sets[static_cast<std::size_t>(i)];
      Vector column = class_means[static_cast<std::size_t>(i)].col(label) +
                      spec.shared_strength * (loadings[static_cast<std::size_t>(i)] * latent);
      for (Eigen::Index r = 0; r < column.size(); ++r) column[r] += spec.noise * rng.next();
      set.values.col(j) = column;
    }
  }
  return data;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  check_spec(spec);
  GaussianSource rng(spec.seed);

  const int min_dim = *std::min_element(spec.dims.begin(), spec.dims.end());
  const int latent_rank = std::min(min_dim, 8);

  std::vector<Matrix> class_means;
  class_means.reserve(static_cast<std::size_t>(spec.set_count));
  for (int i = 0; i < spec.set_count; ++i)
    class_means.push_back(spec.separation *
                          rng.matrix(spec.dims[static_cast<std::size_t>(i)], spec.class_count));

  std::vector<Matrix> loadings;
  loadings.reserve(static_cast<std::size_t>(spec.set_count));
  const double latent_scale = 1.0 / std::sqrt(double(latent_rank));
  for (int i = 0; i < spec.set_count; ++i)
    loadings.push_back(latent_scale *
                       rng.matrix(spec.dims[static_cast<std::size_t>(i)], latent_rank));

  SyntheticData data;
  data.train = draw_split(spec, class_means, loadings, latent_rank, spec.n_train, rng);
  data.test = draw_split(spec, class_means, loadings, latent_rank, spec.n_test, rng);
  return data;
}

}  // namespace dmcca
