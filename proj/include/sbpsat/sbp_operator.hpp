#pragma once

#include "sbpsat/csv.hpp"
#include "sbpsat/grid.hpp"
#include "sbpsat/lexicographic_lsq.hpp"
#include "sbpsat/norm_matrix.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sbpsat {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// The 14 free coefficients of a Q with the SBP(4,2) sparsity pattern:
///
///   [0, 6)   left corner upper triangle   q01 q02 q03 q12 q13 q23
///   [6, 12)  right corner, same pairs     r01 ... r23, r_ij sits at (N-j, N-i)
///   12, 13   interior band                a1 a2
struct StencilVector {
  static constexpr int kSize = 14;
  static constexpr int kLeft = 0;
  static constexpr int kRight = 6;
  static constexpr int kA1 = 12;
  static constexpr int kA2 = 13;

  using Coefficients = Eigen::Matrix<double, kSize, 1>;

  Coefficients values = Coefficients::Zero();

  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }
  friend bool operator==(const StencilVector& a, const StencilVector& b)
  {
    return a.values == b.values;
  }
};

/// Upper-triangle pairs of a 4x4 corner block, in StencilVector order.
inline constexpr std::array<std::pair<int, int>, 6> kCornerPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Calls f(unknown, row, col, sign) for every entry of Q driven by a free
/// coefficient. Entries come in antisymmetric (+1, -1) pairs; no (row, col)
/// is visited twice. The fixed corners Q[0,0] = -1/2, Q[N,N] = 1/2 are not visited.
template <class F>
void for_each_placement(int intervals, F&& f)
{
  const int n = intervals;
  for (int k = 0; k < 6; ++k) {
    const auto [i, j] = kCornerPairs[k];
    f(StencilVector::kLeft + k, i, j, 1.0);
    f(StencilVector::kLeft + k, j, i, -1.0);
    f(StencilVector::kRight + k, n - j, n - i, 1.0);
    f(StencilVector::kRight + k, n - i, n - j, -1.0);
  }
  for (int d = 1; d <= 2; ++d) {
    const int unknown = d == 1 ? StencilVector::kA1 : StencilVector::kA2;
    for (int i = 0; i + d <= n; ++i) {
      const int j = i + d;
      if (j <= 3 || i >= n - 3) continue;  // inside a corner block
      f(unknown, i, j, 1.0);
      f(unknown, j, i, -1.0);
    }
  }
}

/// Q for the given coefficients on N+1 points.
inline SparseRowMatrix assemble_q(const StencilVector& w, int intervals)
{
  require_intervals(intervals, "assemble_q");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(4 * intervals + 32));
  entries.emplace_back(0, 0, -0.5);
  entries.emplace_back(intervals, intervals, 0.5);
  for_each_placement(intervals, [&](int k, int row, int col, double sign) {
    entries.emplace_back(row, col, sign * w[k]);
  });
  SparseRowMatrix q(intervals + 1, intervals + 1);
  q.setFromTriplets(entries.begin(), entries.end());
  return q;
}

inline StencilVector sbp42_stencil()
{
  StencilVector w;
  const std::array<double, 6> q{59.0 / 96.0, -1.0 / 12.0, -1.0 / 32.0, 59.0 / 96.0, 0.0, 59.0 / 96.0};
  for (int k = 0; k < 6; ++k) {
    w[StencilVector::kLeft + k] = q[k];
    w[StencilVector::kRight + k] = q[k];
  }
  w[StencilVector::kA1] = 2.0 / 3.0;
  w[StencilVector::kA2] = -1.0 / 12.0;
  return w;
}

/// SBP(4,2) boundary norm weights p0..p3.
inline constexpr std::array<double, 4> kSbp42Weights{17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0,
                                                     49.0 / 48.0};

enum class OperatorKind { Sbp42, BlockNormTarget, Adaptive };

inline const char* to_string(OperatorKind kind)
{
  switch (kind) {
    case OperatorKind::Sbp42: return "SBP42";
    case OperatorKind::BlockNormTarget: return "BlockNormTarget";
    case OperatorKind::Adaptive: return "Adaptive";
  }
  return "?";
}

/// First-derivative SBP operator D = P^{-1} Q on one block of N+1 points.
struct SbpOperator {
  int intervals;
  double dx;
  NormMatrix norm;
  SparseRowMatrix q;
  OperatorKind kind;

  int size() const { return intervals + 1; }
  Eigen::VectorXd derivative(const Eigen::VectorXd& u) const { return norm.solve(q * u); }
  Eigen::MatrixXd dense_q() const { return Eigen::MatrixXd(q); }
};

/// Reads the free coefficients back out of an operator's Q. Throws if Q has an
/// entry the pattern cannot reproduce (tolerance 1e-14).
inline StencilVector extract_w(const SbpOperator& op)
{
  const int n = op.intervals;
  if (op.q.rows() != n + 1 || op.q.cols() != n + 1) {
    throw std::invalid_argument("extract_w: Q has the wrong shape");
  }
  StencilVector w;
  std::array<bool, StencilVector::kSize> seen{};
  for_each_placement(n, [&](int k, int row, int col, double sign) {
    if (sign > 0.0 && !seen[k]) {
      w[k] = op.q.coeff(row, col);
      seen[k] = true;
    }
  });
  const SparseRowMatrix diff = assemble_q(w, n) - op.q;
  double worst = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  if (worst > 1e-14) {
    throw std::invalid_argument("extract_w: operator violates the SBP(4,2) sparsity pattern (deviation " +
                                format_sci(worst) + ")");
  }
  return w;
}

inline SbpOperator make_sbp42(int intervals, double dx)
{
  require_intervals(intervals, "make_sbp42");
  if (!(dx > 0.0)) throw std::invalid_argument("make_sbp42: dx must be positive");
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(intervals + 1, dx);
  for (int i = 0; i < 4; ++i) {
    weights[i] = kSbp42Weights[i] * dx;
    weights[intervals - i] = kSbp42Weights[i] * dx;
  }
  return SbpOperator{intervals, dx, NormMatrix::diagonal(std::move(weights)),
                     assemble_q(sbp42_stencil(), intervals), OperatorKind::Sbp42};
}

/// Grid-independent coefficients of the block-norm target operator.
struct BlockNormCoefficients {
  Eigen::Matrix4d norm_block;     ///< left corner of P / dx
  std::array<double, 6> q{};      ///< left corner of Q, kCornerPairs order
  double residual = 0.0;          ///< max-norm residual of the exactness system
  int free_parameters = 0;        ///< nullity of the exactness system
};

/// Solves the exactness conditions D x^m = m x^(m-1), m = 0..3, on rows 0..3
/// for the symmetric 4x4 norm block (10 unknowns) and the left Q block (6
/// unknowns), with the interior band fixed at (2/3, -1/12). The system is
/// posed in grid-index coordinates, which is equivalent for any dx and origin
/// since the polynomial space is invariant under affine maps. It has a
/// two-parameter solution family; the member closest to the SBP(4,2)
/// coefficients is taken (the minimum-norm member is indefinite).
inline BlockNormCoefficients solve_blocknorm_coefficients()
{
  constexpr int kPoints = 8;  // rows 0..3 couple to columns <= 5
  constexpr std::array<std::pair<int, int>, 10> norm_pairs{
      {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

  StencilVector band;
  band[StencilVector::kA1] = 2.0 / 3.0;
  band[StencilVector::kA2] = -1.0 / 12.0;
  const Eigen::MatrixXd q_fixed(assemble_q(band, kPoints));

  // Row 4m + i: (Q x^m)_i - (P m x^(m-1))_i = 0.
  LeastSquaresProblem system{Eigen::MatrixXd::Zero(16, 16), Eigen::VectorXd::Zero(16)};
  Eigen::VectorXd xi(kPoints + 1);
  for (int i = 0; i <= kPoints; ++i) xi[i] = i;

  for (int m = 0; m <= 3; ++m) {
    const Eigen::VectorXd u = xi.array().pow(m);
    const Eigen::VectorXd du =
        m == 0 ? Eigen::VectorXd::Zero(kPoints + 1) : Eigen::VectorXd(m * xi.array().pow(m - 1));
    const Eigen::VectorXd fixed = q_fixed * u;
    for (int row = 0; row < 4; ++row) {
      const int eq = 4 * m + row;
      for (int k = 0; k < 10; ++k) {
        const auto [a, b] = norm_pairs[k];
        if (a == row) system.a(eq, k) -= du[b];
        if (b == row && a != b) system.a(eq, k) -= du[a];
      }
      system.b[eq] = -fixed[row];
    }
    for_each_placement(kPoints, [&](int k, int row, int col, double sign) {
      if (k < StencilVector::kRight && row < 4) system.a(4 * m + row, 10 + k) += sign * u[col];
    });
  }

  Eigen::VectorXd anchor = Eigen::VectorXd::Zero(16);
  const StencilVector reference = sbp42_stencil();
  for (int k = 0; k < 10; ++k) {
    const auto [a, b] = norm_pairs[k];
    if (a == b) anchor[k] = kSbp42Weights[a];
  }
  for (int k = 0; k < 6; ++k) anchor[10 + k] = reference[StencilVector::kLeft + k];

  LexicographicDiagnostics diag;
  const Eigen::VectorXd s =
      solve_lexicographic(std::span<const LeastSquaresProblem>(&system, 1), anchor, 1e-10, &diag);

  BlockNormCoefficients out;
  for (int k = 0; k < 10; ++k) {
    const auto [a, b] = norm_pairs[k];
    out.norm_block(a, b) = s[k];
    out.norm_block(b, a) = s[k];
  }
  for (int k = 0; k < 6; ++k) out.q[k] = s[10 + k];
  out.residual = (system.a * s - system.b).cwiseAbs().maxCoeff();
  out.free_parameters = diag.remaining_freedom;

  if (out.residual > 1e-10) {
    throw std::runtime_error("block-norm target: exactness system inconsistent, residual " +
                             format_sci(out.residual));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(out.norm_block, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::runtime_error("block-norm target: norm block not positive definite, min eigenvalue " +
                             format_sci(eig.eigenvalues().minCoeff()));
  }
  return out;
}

inline const BlockNormCoefficients& blocknorm_coefficients()
{
  static const BlockNormCoefficients coefficients = solve_blocknorm_coefficients();
  return coefficients;
}

/// Block-norm SBP operator with the SBP(4,2) Q pattern and third-order
/// boundary closures. Used only to produce target derivatives.
inline SbpOperator make_blocknorm_target(int intervals, double dx)
{
  require_intervals(intervals, "make_blocknorm_target");
  if (!(dx > 0.0)) throw std::invalid_argument("make_blocknorm_target: dx must be positive");
  const auto& c = blocknorm_coefficients();
  StencilVector w;
  for (int k = 0; k < 6; ++k) {
    w[StencilVector::kLeft + k] = c.q[k];
    w[StencilVector::kRight + k] = c.q[k];
  }
  w[StencilVector::kA1] = 2.0 / 3.0;
  w[StencilVector::kA2] = -1.0 / 12.0;
  const Eigen::Matrix4d block = dx * c.norm_block;
  return SbpOperator{intervals, dx, NormMatrix::block(block, intervals, dx), assemble_q(w, intervals),
                     OperatorKind::BlockNormTarget};
}

/// max |Q + Q^T - diag(-1, 0, ..., 0, 1)|.
inline double sbp_identity_residual(const SparseRowMatrix& q)
{
  const int n = static_cast<int>(q.rows()) - 1;
  SparseRowMatrix s = q + SparseRowMatrix(q.transpose());
  s.coeffRef(0, 0) += 1.0;
  s.coeffRef(n, n) -= 1.0;
  double worst = 0.0;
  for (int r = 0; r < s.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(s, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

struct OperatorReport {
  double sbp_identity_residual = 0.0;
  bool norm_spd = false;
  /// Per row, the largest d such that D is exact on x^0..x^d; -1 if not even
  /// constants are differentiated exactly.
  std::vector<int> exactness_degrees;
};

inline constexpr int kMaxTestedDegree = 6;
inline constexpr double kExactnessTolerance = 1e-9;

/// Checks the SBP identity, positivity of P, and per-row polynomial exactness
/// on the abscissae origin + i*dx. A row counts as exact for degree m when
/// |(D x^m)_i - m x_i^(m-1)| <= 1e-9 * max(1, max_j |m x_j^(m-1)|).
inline OperatorReport validate_sbp(const SbpOperator& op, double origin = 0.0)
{
  OperatorReport report;
  report.sbp_identity_residual = sbp_identity_residual(op.q);
  report.norm_spd = op.norm.is_positive_definite();

  const int n = op.intervals;
  Eigen::VectorXd x(n + 1);
  for (int i = 0; i <= n; ++i) x[i] = origin + i * op.dx;

  report.exactness_degrees.assign(static_cast<std::size_t>(n + 1), kMaxTestedDegree);
  std::vector<bool> open(static_cast<std::size_t>(n + 1), true);
  for (int m = 0; m <= kMaxTestedDegree; ++m) {
    const Eigen::VectorXd u = x.array().pow(m);
    const Eigen::VectorXd du =
        m == 0 ? Eigen::VectorXd::Zero(n + 1) : Eigen::VectorXd(m * x.array().pow(m - 1));
    const double tol = kExactnessTolerance * std::max(1.0, du.cwiseAbs().maxCoeff());
    const Eigen::VectorXd err = (op.derivative(u) - du).cwiseAbs();
    for (int i = 0; i <= n; ++i) {
      if (open[i] && !(err[i] <= tol)) {
        report.exactness_degrees[i] = m - 1;
        open[i] = false;
      }
    }
  }
  return report;
}

/// Debug dump of P and Q as dense CSV.
inline void write_operator_csv(std::ostream& p_out, std::ostream& q_out, const SbpOperator& op)
{
  write_dense_csv(p_out, op.norm.dense());
  write_dense_csv(q_out, op.dense_q());
}

}  // namespace sbpsat
