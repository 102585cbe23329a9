#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace sbpsat {

/// One (A, b) pair of an ordered least-squares sequence.
struct LeastSquaresProblem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

/// Per-stage record of a lexicographic solve.
struct LexicographicDiagnostics {
  /// Singular values of each stage restricted to the minimizer set of its
  /// predecessors (descending).
  std::vector<Eigen::VectorXd> singular_values;
  /// Numerical rank used for each stage.
  std::vector<int> ranks;
  /// Dimension of the minimizer set left after the last stage.
  int remaining_freedom = 0;
};

/// Numerical rank with cutoff sigma_i >= rel_tol * sigma_max. Zero matrices have rank 0.
inline int numerical_rank(const Eigen::VectorXd& singular_values, double rel_tol)
{
  if (singular_values.size() == 0 || !(singular_values[0] > 0.0)) return 0;
  const double cutoff = rel_tol * singular_values[0];
  int rank = 0;
  while (rank < singular_values.size() && singular_values[rank] >= cutoff) ++rank;
  return rank;
}

inline int numerical_rank(const Eigen::MatrixXd& a, double rel_tol)
{
  return numerical_rank(Eigen::VectorXd(Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()),
                        rel_tol);
}

/// Solves an ordered sequence of least-squares problems: the stage-1 residual is
/// minimized, then stage 2 over the stage-1 minimizers, and so on. Whatever
/// freedom survives the last stage is spent minimizing |w - anchor|.
///
/// The minimizer set is carried as w + Z z with Z orthonormal. Each stage is
/// solved for z by a rank-truncated SVD pseudo-inverse of A Z starting from the
/// current w, which keeps every update orthogonal to the surviving subspace, so
/// starting from the anchor gives the anchor-closest point without a final pass.
inline Eigen::VectorXd solve_lexicographic(std::span<const LeastSquaresProblem> stages,
                                           const Eigen::VectorXd& anchor, double rank_tol,
                                           LexicographicDiagnostics* diagnostics = nullptr)
{
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw std::invalid_argument("solve_lexicographic: rank_tol must lie in (0, 1)");
  }
  const Eigen::Index n = anchor.size();
  Eigen::VectorXd w = anchor;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);

  for (const auto& stage : stages) {
    if (stage.a.cols() != n || stage.a.rows() != stage.b.size()) {
      throw std::invalid_argument("solve_lexicographic: stage shape mismatch");
    }
    if (basis.cols() == 0) {
      if (diagnostics) {
        diagnostics->singular_values.emplace_back();
        diagnostics->ranks.push_back(0);
      }
      continue;
    }
    const Eigen::MatrixXd restricted = stage.a * basis;
    const Eigen::VectorXd residual = stage.b - stage.a * w;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd sigma = svd.singularValues();
    const int rank = numerical_rank(sigma, rank_tol);

    const auto u = svd.matrixU().leftCols(rank);
    const auto v = svd.matrixV();
    const Eigen::VectorXd coeffs =
        (u.transpose() * residual).cwiseQuotient(sigma.head(rank));
    w += basis * (v.leftCols(rank) * coeffs);
    basis = (basis * v.rightCols(v.cols() - rank)).eval();

    if (diagnostics) {
      diagnostics->singular_values.push_back(sigma);
      diagnostics->ranks.push_back(rank);
    }
  }
  if (diagnostics) diagnostics->remaining_freedom = static_cast<int>(basis.cols());
  return w;
}

}  // namespace sbpsat
