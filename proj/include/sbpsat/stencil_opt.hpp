#pragma once

#include "sbpsat/lexicographic_lsq.hpp"
#include "sbpsat/sbp_operator.hpp"

#include <Eigen/Dense>

#include <array>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbpsat {

/// One least-squares stage A(u) w = b(u, v) over the 14 stencil coefficients.
/// A(u) w - b(u, v) = Q(w) u - P v.
using LsStage = LeastSquaresProblem;

struct OptimizerConfig {
  /// Relative singular-value cutoff for each stage.
  double rank_tol = 1e-10;
  /// Remaining freedom after the last stage is resolved toward this point.
  StencilVector fallback_anchor = sbp42_stencil();

  void validate() const
  {
    if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
      throw std::invalid_argument("OptimizerConfig: rank_tol must lie in (0, 1)");
    }
  }
};

/// Builds the stage for fitting Q u to P v. Column j of A is M_j u where M_j is
/// the +-1 placement pattern of coefficient j; b = P v - Q_fixed u with Q_fixed
/// holding the corner entries -1/2 and 1/2.
inline LsStage build_stage(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const NormMatrix& norm)
{
  if (u.size() != v.size() || u.size() != norm.size()) {
    throw std::invalid_argument("build_stage: u, v and P must have matching sizes");
  }
  const int n = static_cast<int>(u.size()) - 1;
  require_intervals(n, "build_stage");
  LsStage stage{Eigen::MatrixXd::Zero(n + 1, StencilVector::kSize), norm.apply(v)};
  stage.b[0] += 0.5 * u[0];
  stage.b[n] -= 0.5 * u[n];
  for_each_placement(n, [&](int k, int row, int col, double sign) { stage.a(row, k) += sign * u[col]; });
  return stage;
}

/// Exactness stage for x^m, m in {0, 1}, on the given abscissae.
inline LsStage accuracy_stage(int degree, const Eigen::VectorXd& coords, const NormMatrix& norm)
{
  switch (degree) {
    case 0:
      return build_stage(Eigen::VectorXd::Ones(coords.size()), Eigen::VectorXd::Zero(coords.size()), norm);
    case 1:
      return build_stage(coords, Eigen::VectorXd::Ones(coords.size()), norm);
    default:
      throw std::invalid_argument("accuracy_stage: degree must be 0 or 1");
  }
}

inline double stage_residual(const LsStage& stage, const StencilVector& w)
{
  return (stage.a * w.values - stage.b).norm();
}

inline StencilVector lexicographic_lsq(std::span<const LsStage> stages, const OptimizerConfig& config,
                                       LexicographicDiagnostics* diagnostics = nullptr)
{
  config.validate();
  if (stages.empty()) throw std::invalid_argument("lexicographic_lsq: no stages");
  for (const auto& s : stages) {
    if (s.a.cols() != StencilVector::kSize) {
      throw std::invalid_argument("lexicographic_lsq: stages must have 14 columns");
    }
  }
  StencilVector w;
  w.values = solve_lexicographic(stages, config.fallback_anchor.values, config.rank_tol, diagnostics);
  return w;
}

/// The three stages behind an adaptive operator: fit the target derivative of
/// u, then constants, then linears.
inline std::array<LsStage, 3> adaptive_stages(const Eigen::VectorXd& u, const SbpOperator& base,
                                              const SbpOperator& target, const Eigen::VectorXd& coords)
{
  const Eigen::VectorXd v = target.derivative(u);
  return {build_stage(u, v, base.norm), accuracy_stage(0, coords, base.norm),
          accuracy_stage(1, coords, base.norm)};
}

/// Re-optimizes Q for the block data u, keeping the base operator's P.
/// `coords` are the block's physical abscissae; when omitted, i*dx is used.
inline SbpOperator optimize_block_operator(const Eigen::VectorXd& u, const SbpOperator& base,
                                           const SbpOperator& target, const OptimizerConfig& config,
                                           const Eigen::VectorXd* coords = nullptr,
                                           LexicographicDiagnostics* diagnostics = nullptr)
{
  if (base.intervals != target.intervals || base.dx != target.dx) {
    throw std::invalid_argument("optimize_block_operator: base and target grids differ");
  }
  if (u.size() != base.size()) throw std::invalid_argument("optimize_block_operator: u has the wrong length");
  Eigen::VectorXd local;
  if (coords == nullptr) {
    local.resize(base.size());
    for (int i = 0; i < base.size(); ++i) local[i] = i * base.dx;
    coords = &local;
  }
  const auto stages = adaptive_stages(u, base, target, *coords);
  const StencilVector w = lexicographic_lsq(stages, config, diagnostics);
  return SbpOperator{base.intervals, base.dx, base.norm, assemble_q(w, base.intervals), OperatorKind::Adaptive};
}

/// Diagnostic dump: one row per stage, `stage,rank,sigma_0,...`.
inline void write_singular_values_csv(std::ostream& os, const LexicographicDiagnostics& diag)
{
  os << "stage,rank";
  for (int i = 0; i < StencilVector::kSize; ++i) os << ",sigma_" << i;
  os << '\n';
  for (std::size_t s = 0; s < diag.singular_values.size(); ++s) {
    os << s + 1 << ',' << diag.ranks[s];
    const auto& sigma = diag.singular_values[s];
    for (int i = 0; i < StencilVector::kSize; ++i) {
      os << ',';
      if (i < sigma.size()) os << format_sci(sigma[i]);
    }
    os << '\n';
  }
}

}  // namespace sbpsat
