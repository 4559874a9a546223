#include "dmcca/cca_family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmcca {

const char* to_string(Method kind) {
  switch (kind) {
    case Method::Cca: return "cca";
    case Method::Mcca: return "mcca";
    case Method::Dcca: return "dcca";
    case Method::Dmcca: return "dmcca";
    case Method::Serial: return "serial";
  }
  return "?";
}

const char* to_string(Fusion fusion) {
  return fusion == Fusion::Sum ? "sum" : "concat";
}

Method method_from_string(const std::string& name) {
  if (name == "cca") return Method::Cca;
  if (name == "mcca") return Method::Mcca;
  if (name == "dcca") return Method::Dcca;
  if (name == "dmcca") return Method::Dmcca;
  if (name == "serial") return Method::Serial;
  throw std::invalid_argument("unknown method '" + name + "'");
}

Fusion fusion_from_string(const std::string& name) {
  if (name == "sum") return Fusion::Sum;
  if (name == "concat") return Fusion::Concat;
  throw std::invalid_argument("unknown fusion strategy '" + name + "'");
}

namespace {

void check_method_arity(Method kind, int set_count) {
  if (kind == Method::Serial)
    throw std::invalid_argument("serial fusion has no coupling pair; use serial_fuse");
  if (set_count < 2) throw std::invalid_argument("coupling needs at least 2 feature sets");
  if ((kind == Method::Cca || kind == Method::Dcca) && set_count != 2)
    throw std::invalid_argument(std::string(to_string(kind)) + " requires exactly 2 sets, got " +
                                std::to_string(set_count));
}

void check_centered(const MultisetDataset& data) {
  for (const auto& set : data.sets) {
    for (Eigen::Index i = 0; i < set.dim(); ++i) {
      const double scale = set.values.row(i).cwiseAbs().sum();
      if (std::abs(set.values.row(i).sum()) > 1e-8 * scale)
        throw std::invalid_argument("coupling input is not centered (set " +
                                    std::to_string(set.set_id) + ", feature " +
                                    std::to_string(i) + ")");
    }
  }
}

void check_class_occupancy(const LabelVector& labels) {
  std::vector<int> counts(static_cast<std::size_t>(labels.class_count), 0);
  for (Eigen::Index j = 0; j < labels.size(); ++j)
    ++counts[static_cast<std::size_t>(labels.labels[j])];
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 1)
      throw std::invalid_argument("class " + std::to_string(l) +
                                  " has a single sample; discriminative coupling needs at "
                                  "least 2 per present class");
  }
}

int distinct_labels(const LabelVector& labels) {
  std::vector<char> seen(static_cast<std::size_t>(labels.class_count), 0);
  int distinct = 0;
  for (Eigen::Index j = 0; j < labels.size(); ++j) {
    char& flag = seen[static_cast<std::size_t>(labels.labels[j])];
    if (!flag) {
      flag = 1;
      ++distinct;
    }
  }
  return distinct;
}

}  // namespace

int predicted_dim_bound(const MultisetDataset& data) {
  validate(data);
  Eigen::Index bound = data.labels.class_count;
  for (const auto& set : data.sets) bound = std::min(bound, set.dim());
  return static_cast<int>(bound);
}

CouplingPair build_coupling(const MultisetDataset& centered, MethodSpec method,
                            CouplingOptions options) {
  validate(centered);
  check_method_arity(method.kind, centered.set_count());
  check_centered(centered);

  const bool discriminative =
      (method.kind == Method::Dcca || method.kind == Method::Dmcca) &&
      !options.identity_indicator;
  if (discriminative) check_class_occupancy(centered.labels);

  const int p = centered.set_count();
  const Eigen::Index q = centered.total_dim();

  CouplingPair pair;
  pair.offsets.resize(static_cast<std::size_t>(p) + 1);
  pair.offsets[0] = 0;
  for (int i = 0; i < p; ++i)
    pair.offsets[static_cast<std::size_t>(i) + 1] =
        pair.offsets[static_cast<std::size_t>(i)] + centered.sets[static_cast<std::size_t>(i)].dim();

  std::vector<Matrix> sums;
  if (discriminative) {
    sums.reserve(static_cast<std::size_t>(p));
    for (const auto& set : centered.sets)
      sums.push_back(class_sums(set, centered.labels).sums);
  }

  pair.coupling = Matrix::Zero(q, q);
  pair.diag = Matrix::Zero(q, q);
  for (int k = 0; k < p; ++k) {
    const auto& xk = centered.sets[static_cast<std::size_t>(k)].values;
    const Eigen::Index rk = pair.offsets[static_cast<std::size_t>(k)];
    // Rank update keeps the auto-correlation exactly symmetric.
    Matrix lower = Matrix::Zero(xk.rows(), xk.rows());
    lower.selfadjointView<Eigen::Lower>().rankUpdate(xk);
    const Matrix auto_corr = lower.selfadjointView<Eigen::Lower>();
    pair.coupling.block(rk, rk, xk.rows(), xk.rows()) = auto_corr;
    pair.diag.block(rk, rk, xk.rows(), xk.rows()) = auto_corr;
    for (int m = k + 1; m < p; ++m) {
      const auto& xm = centered.sets[static_cast<std::size_t>(m)].values;
      const Eigen::Index rm = pair.offsets[static_cast<std::size_t>(m)];
      const Matrix cross =
          discriminative
              ? Matrix(sums[static_cast<std::size_t>(k)] * sums[static_cast<std::size_t>(m)].transpose())
              : Matrix(xk * xm.transpose());
      pair.coupling.block(rk, rm, cross.rows(), cross.cols()) = cross;
      pair.coupling.block(rm, rk, cross.cols(), cross.rows()) = cross.transpose();
    }
  }
  return pair;
}

ProjectionModel fit(const MultisetDataset& data, MethodSpec method, std::optional<int> dim,
                    CouplingOptions options) {
  validate(data);
  check_method_arity(method.kind, data.set_count());
  if (data.samples() < 2) throw std::invalid_argument("fitting needs at least 2 samples");
  if (distinct_labels(data.labels) < 2)
    throw std::invalid_argument("fitting needs at least 2 distinct classes");

  auto [centered, stats] = center(data);
  const CouplingPair pair = build_coupling(centered, method, options);
  const Matrix hollow = pair.coupling - pair.diag;
  const GevSolution<double> solution = solve_gev(hollow, pair.diag);

  const int bound = predicted_dim_bound(data);
  // "Positive" relative to the spectrum scale, so exact-rank zeros that land
  // at +1e-16 after rounding do not count as retainable directions.
  const double positive_floor = 1e-10 * solution.eigenvalues.cwiseAbs().maxCoeff();
  int positive = 0;
  while (positive < solution.eigenvalues.size() &&
         solution.eigenvalues[positive] > positive_floor)
    ++positive;
  if (positive < 1)
    throw std::runtime_error("pencil has no positive eigenvalue; nothing to retain");

  int d = 0;
  if (dim.has_value()) {
    if (*dim < 1) throw std::invalid_argument("requested dimension must be positive");
    if (*dim > bound)
      throw std::invalid_argument("requested dimension " + std::to_string(*dim) +
                                  " exceeds the predicted bound " + std::to_string(bound));
    if (*dim > positive)
      throw std::runtime_error("requested dimension " + std::to_string(*dim) +
                               " exceeds the " + std::to_string(positive) +
                               " positive eigenvalues available");
    d = *dim;
  } else {
    d = std::min(bound, positive);
  }

  ProjectionModel model;
  model.method = method;
  model.d = d;
  model.d_max = bound;
  model.centering = std::move(stats);
  model.applied_sigma = solution.applied_sigma;
  model.eigenvalues = solution.eigenvalues.head(d);
  model.unit_norm_fallback.assign(static_cast<std::size_t>(d), 0);

  const int p = data.set_count();
  Matrix kept = solution.eigenvectors.leftCols(d);
  for (int j = 0; j < d; ++j) {
    // Constraint scaling: sum_k w_k^T (x_k x_k^T) w_k = P per vector.
    const double quad = kept.col(j).dot(pair.diag * kept.col(j));
    if (quad < 1e-12) {
      kept.col(j).normalize();
      model.unit_norm_fallback[static_cast<std::size_t>(j)] = 1;
    } else {
      kept.col(j) *= std::sqrt(double(p) / quad);
    }
  }

  model.blocks.reserve(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const Eigen::Index row = pair.offsets[static_cast<std::size_t>(i)];
    const Eigen::Index rows = pair.offsets[static_cast<std::size_t>(i) + 1] - row;
    model.blocks.push_back(kept.block(row, 0, rows, d));
  }
  return model;
}

std::vector<Matrix> project(const ProjectionModel& model, const MultisetDataset& data) {
  validate(data);
  if (static_cast<int>(model.blocks.size()) != data.set_count())
    throw std::invalid_argument("model covers " + std::to_string(model.blocks.size()) +
                                " sets, dataset has " + std::to_string(data.set_count()));
  const MultisetDataset centered = apply_centering(model.centering, data);
  std::vector<Matrix> projected;
  projected.reserve(model.blocks.size());
  for (std::size_t i = 0; i < model.blocks.size(); ++i) {
    if (model.blocks[i].rows() != centered.sets[i].dim())
      throw std::invalid_argument("model block " + std::to_string(i) +
                                  " does not match the set dimension");
    projected.push_back(model.blocks[i].transpose() * centered.sets[i].values);
  }
  return projected;
}

FusedFeatures fuse(const std::vector<Matrix>& projected, Fusion strategy,
                   const LabelVector& labels) {
  if (projected.empty()) throw std::invalid_argument("nothing to fuse");
  for (const auto& y : projected) {
    if (y.rows() != projected.front().rows() || y.cols() != projected.front().cols())
      throw std::invalid_argument("projected sets disagree in shape");
  }
  FusedFeatures fused;
  fused.labels = labels;
  if (strategy == Fusion::Sum) {
    fused.values = projected.front();
    for (std::size_t i = 1; i < projected.size(); ++i) fused.values += projected[i];
  } else {
    const Eigen::Index d = projected.front().rows();
    const Eigen::Index n = projected.front().cols();
    fused.values.resize(d * static_cast<Eigen::Index>(projected.size()), n);
    for (std::size_t i = 0; i < projected.size(); ++i)
      fused.values.middleRows(static_cast<Eigen::Index>(i) * d, d) = projected[i];
  }
  return fused;
}

FusedFeatures serial_fuse(const MultisetDataset& data) {
  validate(data);
  FusedFeatures fused;
  fused.labels = data.labels;
  fused.values.resize(data.total_dim(), data.samples());
  Eigen::Index row = 0;
  for (const auto& set : data.sets) {
    fused.values.middleRows(row, set.dim()) = set.values;
    row += set.dim();
  }
  return fused;
}

}  // namespace dmcca
