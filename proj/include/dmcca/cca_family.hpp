#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmcca/dataset.hpp"
#include "dmcca/gev.hpp"

namespace dmcca {

enum class Method { Cca, Mcca, Dcca, Dmcca, Serial };

/// How per-set projected features are combined: elementwise sum (keeps the
/// projected dimension) or vertical concatenation (P times the dimension).
enum class Fusion { Sum, Concat };

struct MethodSpec {
  Method kind = Method::Dmcca;
  Fusion fusion = Fusion::Sum;
};

const char* to_string(Method kind);
const char* to_string(Fusion fusion);
Method method_from_string(const std::string& name);
Fusion fusion_from_string(const std::string& name);

/// The symmetric pencil of the unified problem. `coupling` holds cross-set
/// blocks (class-weighted for the discriminative kinds, plain products
/// otherwise) with auto-correlations on the diagonal; `diag` is its block
/// diagonal. `offsets` marks the P set boundaries inside the joint order Q
/// (size P + 1, offsets.back() == Q).
struct CouplingPair {
  Matrix coupling;
  Matrix diag;
  std::vector<Eigen::Index> offsets;
};

/// Diagnostic hook: forces the class indicator to the identity, which
/// collapses the discriminative kinds onto their plain counterparts.
struct CouplingOptions {
  bool identity_indicator = false;
};

struct ProjectionModel {
  MethodSpec method;
  std::vector<Matrix> blocks;  // per-set projections, m_i x d
  Vector eigenvalues;          // retained, descending, all positive
  int d = 0;
  int d_max = 0;               // predicted bound min(c, m_1, ..., m_P)
  CenteringStats centering;
  double applied_sigma = 0.0;
  // Retained vectors whose pencil quadratic form collapsed and that fell
  // back to unit Euclidean norm instead of the constraint scaling.
  std::vector<std::uint8_t> unit_norm_fallback;
};

struct FusedFeatures {
  Matrix values;  // d x n (sum) or P*d x n (concat)
  LabelVector labels;
};

/// min(c, m_1, ..., m_P): the projected dimension never needs to exceed it.
int predicted_dim_bound(const MultisetDataset& data);

/// Builds (C, D) from a centered dataset. Off-diagonal block (k, m) is the
/// class-weighted product S_k S_m^T for DMCCA/DCCA and the plain x_k x_m^T
/// for MCCA/CCA; diagonal blocks of both matrices are x_i x_i^T.
CouplingPair build_coupling(const MultisetDataset& centered, MethodSpec method,
                            CouplingOptions options = {});

/// Centers the data, builds the coupling pair, solves the pencil and keeps
/// the top-d eigenvectors among those with positive eigenvalue, each scaled
/// so sum_k w_k^T (x_k x_k^T) w_k = P.
ProjectionModel fit(const MultisetDataset& data, MethodSpec method,
                    std::optional<int> dim = std::nullopt, CouplingOptions options = {});

/// Y_i = w_i^T (x_i - stored means). Input must not be pre-centered; the
/// model applies its own training statistics.
std::vector<Matrix> project(const ProjectionModel& model, const MultisetDataset& data);

FusedFeatures fuse(const std::vector<Matrix>& projected, Fusion strategy,
                   const LabelVector& labels);

/// Plain vertical concatenation of the raw feature sets, Q x n. No
/// projection and no centering of its own.
FusedFeatures serial_fuse(const MultisetDataset& data);

}  // namespace dmcca
