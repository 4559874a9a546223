#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dmcca {

/// Ridge ladder applied to the right-hand matrix when its Cholesky
/// factorization fails: sigma = eps * trace(R)/Q with eps growing
/// geometrically from initial_eps up to eps_cap.
template <typename Scalar>
struct RegularizationPolicy {
  Scalar initial_eps = Scalar(1e-8);
  Scalar growth = Scalar(10);
  Scalar eps_cap = Scalar(1e-2);
};

template <typename Scalar>
struct GevSolution {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType eigenvalues;   // sorted descending
  MatrixType eigenvectors;  // columns, scaled so w^T (R + sigma I) w = 1
  Scalar applied_sigma = Scalar(0);
  VectorType residuals;     // ||L w - rho (R + sigma I) w||_2 per pair
};

/// Symmetric pencil (L, R) with R positive semidefinite. L plays the
/// hollow coupling difference, R the block-diagonal of auto-correlations.
template <typename Scalar>
struct GevProblem {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixType lhs;
  MatrixType rhs;
  RegularizationPolicy<Scalar> policy;
};

namespace detail {

template <typename Derived>
void check_pencil_matrix(const Eigen::MatrixBase<Derived>& m, const char* name) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(name) + " matrix is not square");
  if (!m.allFinite())
    throw std::invalid_argument(std::string(name) + " matrix has non-finite entries");
  const Scalar scale = m.cwiseAbs().maxCoeff();
  const Scalar defect = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (defect > Scalar(1e-8) * scale)
    throw std::invalid_argument(std::string(name) + " matrix is not symmetric");
}

/// Smallest sigma from the ladder (starting at 0) whose shifted Cholesky
/// succeeds. Returns the factorization alongside.
template <typename Scalar>
std::pair<Scalar, Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>>
choose_regularization(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs,
                      const RegularizationPolicy<Scalar>& policy) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index q = rhs.rows();
  Scalar scale = rhs.trace() / Scalar(q);
  if (!(scale > Scalar(0))) scale = Scalar(1);

  Eigen::LLT<MatrixType> llt(rhs);
  if (llt.info() == Eigen::Success) return {Scalar(0), std::move(llt)};

  const Scalar cap = policy.eps_cap * Scalar(1 + 1e-12);
  for (Scalar eps = policy.initial_eps; eps <= cap; eps *= policy.growth) {
    const Scalar sigma = eps * scale;
    llt.compute(rhs + sigma * MatrixType::Identity(q, q));
    if (llt.info() == Eigen::Success) return {sigma, std::move(llt)};
  }
  throw std::runtime_error(
      "right-hand matrix stayed non-factorizable through the regularization ladder");
}

/// Flips each column so its largest-magnitude entry is positive.
template <typename MatrixType>
void fix_signs(MatrixType& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index pivot = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&pivot);
    if (vectors(pivot, j) < typename MatrixType::Scalar(0)) vectors.col(j) = -vectors.col(j);
  }
}

}  // namespace detail

/// Residual norms ||L w_j - rho_j (R + sigma I) w_j||_2 for every pair of a
/// solution, using the sigma the solver applied.
template <typename Scalar>
typename GevSolution<Scalar>::VectorType residuals(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& lhs,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs,
    const GevSolution<Scalar>& solution) {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index q = rhs.rows();
  const MatrixType shifted =
      rhs + solution.applied_sigma * MatrixType::Identity(q, q);
  typename GevSolution<Scalar>::VectorType out(solution.eigenvalues.size());
  for (Eigen::Index j = 0; j < solution.eigenvalues.size(); ++j) {
    out[j] = (lhs * solution.eigenvectors.col(j) -
              solution.eigenvalues[j] * (shifted * solution.eigenvectors.col(j)))
                 .norm();
  }
  return out;
}

/// Solves L w = rho (R + sigma I) w by Cholesky whitening of the shifted
/// right-hand matrix. Eigenvalues come back descending with a deterministic
/// sign convention; eigenvectors satisfy w^T (R + sigma I) w = 1.
template <typename DerivedL, typename DerivedR>
GevSolution<typename DerivedL::Scalar> solve_gev(
    const Eigen::MatrixBase<DerivedL>& lhs, const Eigen::MatrixBase<DerivedR>& rhs,
    const RegularizationPolicy<typename DerivedL::Scalar>& policy = {}) {
  using Scalar = typename DerivedL::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  detail::check_pencil_matrix(lhs, "left-hand");
  detail::check_pencil_matrix(rhs, "right-hand");
  if (lhs.rows() != rhs.rows())
    throw std::invalid_argument("pencil matrices differ in order");

  const MatrixType lhs_m = lhs;
  const MatrixType rhs_m = rhs;
  auto [sigma, llt] = detail::choose_regularization(rhs_m, policy);

  // Whiten: M = G^-1 L G^-T with R + sigma I = G G^T, then symmetrize away
  // the factorization round-off.
  MatrixType half = llt.matrixL().solve(lhs_m);
  MatrixType whitened = llt.matrixL().solve(half.transpose()).transpose();
  whitened = Scalar(0.5) * (whitened + whitened.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixType> es(whitened);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("whitened symmetric eigensolver failed to converge");

  const Eigen::Index q = lhs_m.rows();
  GevSolution<Scalar> solution;
  solution.applied_sigma = sigma;
  solution.eigenvalues.resize(q);
  solution.eigenvectors.resize(q, q);
  // Ascending from the solver; emit descending. Ties keep the reversed
  // solver order, which is deterministic.
  MatrixType back_mapped = llt.matrixU().solve(es.eigenvectors());
  for (Eigen::Index j = 0; j < q; ++j) {
    solution.eigenvalues[j] = es.eigenvalues()[q - 1 - j];
    solution.eigenvectors.col(j) = back_mapped.col(q - 1 - j);
  }
  detail::fix_signs(solution.eigenvectors);
  solution.residuals = residuals(lhs_m, rhs_m, solution);
  return solution;
}

template <typename Scalar>
GevSolution<Scalar> solve_gev(const GevProblem<Scalar>& problem) {
  return solve_gev(problem.lhs, problem.rhs, problem.policy);
}

/// Brute-force route for tests: forms (R + sigma I)^-1 L with a dense LU
/// solve and reads real eigenvalues off the non-symmetric product. Capped at
/// order 100.
template <typename DerivedL, typename DerivedR>
GevSolution<typename DerivedL::Scalar> oracle_gev(
    const Eigen::MatrixBase<DerivedL>& lhs, const Eigen::MatrixBase<DerivedR>& rhs,
    const RegularizationPolicy<typename DerivedL::Scalar>& policy = {}) {
  using Scalar = typename DerivedL::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  detail::check_pencil_matrix(lhs, "left-hand");
  detail::check_pencil_matrix(rhs, "right-hand");
  if (lhs.rows() != rhs.rows())
    throw std::invalid_argument("pencil matrices differ in order");
  const Eigen::Index q = lhs.rows();
  if (q > 100) throw std::invalid_argument("oracle_gev is capped at order 100");

  const MatrixType lhs_m = lhs;
  const MatrixType rhs_m = rhs;
  auto [sigma, llt] = detail::choose_regularization(rhs_m, policy);
  const MatrixType shifted = rhs_m + sigma * MatrixType::Identity(q, q);
  const MatrixType product = Eigen::PartialPivLU<MatrixType>(shifted).solve(lhs_m);

  Eigen::EigenSolver<MatrixType> es(product);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed to converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
  for (Eigen::Index j = 0; j < q; ++j) order[static_cast<std::size_t>(j)] = j;
  const auto values = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[a].real() > values[b].real();
  });

  GevSolution<Scalar> solution;
  solution.applied_sigma = sigma;
  solution.eigenvalues.resize(q);
  solution.eigenvectors.resize(q, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    solution.eigenvalues[j] = values[order[static_cast<std::size_t>(j)]].real();
    solution.eigenvectors.col(j) =
        es.eigenvectors().col(order[static_cast<std::size_t>(j)]).real();
  }
  detail::fix_signs(solution.eigenvectors);
  solution.residuals = residuals(lhs_m, rhs_m, solution);
  return solution;
}

template <typename Scalar>
GevSolution<Scalar> oracle_gev(const GevProblem<Scalar>& problem) {
  return oracle_gev(problem.lhs, problem.rhs, problem.policy);
}

}  // namespace dmcca
