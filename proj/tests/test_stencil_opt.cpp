#include "sbpsat/stencil_opt.hpp"
#include "sbpsat/validation.hpp"

#include <gtest/gtest.h>

#include <random>

namespace sbpsat {
namespace {

Eigen::VectorXd abscissae(int n, double dx, double origin = 0.0)
{
  return Eigen::VectorXd::LinSpaced(n + 1, origin, origin + n * dx);
}

// Placement pattern of coefficient j as a dense matrix, built from the
// assembler by differencing unit stencils.
Eigen::MatrixXd placement_matrix(int j, int n)
{
  StencilVector e;
  e[j] = 1.0;
  return Eigen::MatrixXd(assemble_q(e, n)) - Eigen::MatrixXd(assemble_q(StencilVector{}, n));
}

TEST(BuildStage, Shape)
{
  const int n = 11;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const LsStage s = build_stage(Eigen::VectorXd::Ones(n + 1), Eigen::VectorXd::Zero(n + 1), base.norm);
  EXPECT_EQ(s.a.rows(), n + 1);
  EXPECT_EQ(s.a.cols(), 14);
  EXPECT_EQ(s.b.size(), n + 1);
}

TEST(BuildStage, ZeroDataGivesZeroSystem)
{
  const SbpOperator base = make_sbp42(12, 1.0 / 12);
  const LsStage s = build_stage(Eigen::VectorXd::Zero(13), Eigen::VectorXd::Zero(13), base.norm);
  EXPECT_EQ(s.a.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.b.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildStage, ColumnsArePlacementsTimesData)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = 13;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  Eigen::VectorXd u(n + 1), v(n + 1);
  for (auto& x : u) x = dist(rng);
  for (auto& x : v) x = dist(rng);
  const LsStage s = build_stage(u, v, base.norm);
  for (int j = 0; j < 14; ++j) {
    EXPECT_LE((s.a.col(j) - placement_matrix(j, n) * u).cwiseAbs().maxCoeff(), 1e-15) << "column " << j;
  }
  // A w - b = Q(w) u - P v for any w.
  const StencilVector w = random_stencil(rng);
  const Eigen::VectorXd direct = Eigen::MatrixXd(assemble_q(w, n)) * u - base.norm.apply(v);
  EXPECT_LE((s.a * w.values - s.b - direct).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BuildStage, LinearInData)
{
  std::mt19937_64 rng(5);
  const int n = 10;
  const SbpOperator base = make_sbp42(n, 0.1);
  const Eigen::VectorXd x = abscissae(n, 0.1);
  const Eigen::VectorXd u1 = random_smooth(x, rng), u2 = random_smooth(x, rng);
  const Eigen::VectorXd v1 = random_smooth(x, rng), v2 = random_smooth(x, rng);
  const double a = 0.7, b = -1.3;
  const LsStage s1 = build_stage(u1, v1, base.norm), s2 = build_stage(u2, v2, base.norm);
  const LsStage s = build_stage(a * u1 + b * u2, a * v1 + b * v2, base.norm);
  EXPECT_LE((s.a - (a * s1.a + b * s2.a)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((s.b - (a * s1.b + b * s2.b)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BuildStage, Sbp42FitsItsOwnExactData)
{
  const int n = 20;
  const double dx = 1.0 / n;
  const SbpOperator base = make_sbp42(n, dx);
  const Eigen::VectorXd x = abscissae(n, dx, 0.3);
  const LsStage s = build_stage(x.array().square(), 2.0 * x, base.norm);
  EXPECT_LE(stage_residual(s, sbp42_stencil()), 1e-12 * s.b.norm());
}

TEST(BuildStage, RejectsMismatchedSizes)
{
  const SbpOperator base = make_sbp42(10, 0.1);
  EXPECT_THROW(build_stage(Eigen::VectorXd::Ones(11), Eigen::VectorXd::Ones(10), base.norm), std::invalid_argument);
  EXPECT_THROW(build_stage(Eigen::VectorXd::Ones(12), Eigen::VectorXd::Ones(12), base.norm), std::invalid_argument);
}

TEST(AccuracyStage, ConstantStageRightHandSide)
{
  const int n = 12;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const LsStage s = accuracy_stage(0, abscissae(n, 1.0 / n), base.norm);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(n + 1);
  expected[0] = 0.5;
  expected[n] = -0.5;
  EXPECT_EQ(s.b, expected);
  EXPECT_LE(stage_residual(s, sbp42_stencil()), 1e-12);
  EXPECT_LE(stage_residual(accuracy_stage(1, abscissae(n, 1.0 / n, 2.0), base.norm), sbp42_stencil()), 1e-12);
  EXPECT_THROW(accuracy_stage(2, abscissae(n, 1.0 / n), base.norm), std::invalid_argument);
}

TEST(Optimizer, RecoversSbp42FromQuadraticData)
{
  for (int n : {16, 40}) {
    const double dx = 1.0 / n;
    const SbpOperator base = make_sbp42(n, dx);
    const SbpOperator target = make_blocknorm_target(n, dx);
    const Eigen::VectorXd x = abscissae(n, dx);
    const SbpOperator op = optimize_block_operator(x.array().square(), base, target, OptimizerConfig{}, &x);
    EXPECT_LE((op.dense_q() - base.dense_q()).cwiseAbs().maxCoeff(), 1e-8) << "N=" << n;
    EXPECT_EQ(op.kind, OperatorKind::Adaptive);
  }
}

TEST(Optimizer, ConstantDataKeepsSbpPropertiesAndNorm)
{
  const int n = 24;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const SbpOperator target = make_blocknorm_target(n, 1.0 / n);
  const SbpOperator op = optimize_block_operator(Eigen::VectorXd::Constant(n + 1, 3.0), base, target, {});
  EXPECT_LE(sbp_identity_residual(op.q), 1e-14);
  EXPECT_EQ(op.norm.max_abs_difference(base.norm), 0.0);
  EXPECT_EQ(op.norm.diagonal_entries(), base.norm.diagonal_entries());
}

TEST(Optimizer, NormIsPreservedBitForBit)
{
  std::mt19937_64 rng(17);
  const int n = 30;
  const SbpOperator base = make_sbp42(n, 1.0 / 120);
  const SbpOperator target = make_blocknorm_target(n, 1.0 / 120);
  const Eigen::VectorXd x = abscissae(n, 1.0 / 120, 0.25);
  for (int trial = 0; trial < 10; ++trial) {
    const SbpOperator op = optimize_block_operator(random_smooth(x, rng), base, target, {}, &x);
    EXPECT_EQ(op.norm.diagonal_entries(), base.norm.diagonal_entries());
    EXPECT_LE(sbp_identity_residual(op.q), 1e-14);
  }
}

TEST(Optimizer, SmoothDataDeterminesStencilUniquely)
{
  std::mt19937_64 rng(23);
  const int n = 40;
  const double dx = 1.0 / 160;
  const SbpOperator base = make_sbp42(n, dx);
  const SbpOperator target = make_blocknorm_target(n, dx);
  const Eigen::VectorXd x = abscissae(n, dx, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = random_smooth(x, rng);
    LexicographicDiagnostics diag;
    const SbpOperator a = optimize_block_operator(u, base, target, {}, &x, &diag);
    EXPECT_EQ(diag.remaining_freedom, 0);
    OptimizerConfig other;
    other.fallback_anchor = StencilVector{};
    const SbpOperator b = optimize_block_operator(u, base, target, other, &x);
    EXPECT_LE((a.dense_q() - b.dense_q()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Optimizer, FirstStageIsOptimal)
{
  std::mt19937_64 rng(29);
  const int n = 80;
  const double dx = 1.0 / 320;
  const SbpOperator base = make_sbp42(n, dx);
  const SbpOperator target = make_blocknorm_target(n, dx);
  const Eigen::VectorXd x = abscissae(n, dx);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd u = random_smooth(x, rng);
    const auto stages = adaptive_stages(u, base, target, x);
    const StencilVector w = lexicographic_lsq(stages, OptimizerConfig{});
    const double best = stage_residual(stages[0], w);
    const double slack = 1e-10 * (1.0 + stages[0].b.norm());
    EXPECT_LE(best, stage_residual(stages[0], sbp42_stencil()) + slack);
    for (int r = 0; r < 100; ++r) EXPECT_LE(best, stage_residual(stages[0], random_stencil(rng)) + slack);
  }
}

TEST(Optimizer, FirstStageIsRankDeficient)
{
  std::mt19937_64 rng(31);
  const int n = 40;
  const Eigen::VectorXd x = abscissae(n, 1.0 / n);
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const SbpOperator target = make_blocknorm_target(n, 1.0 / n);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = random_smooth(x, rng);
    const LsStage s = build_stage(u, target.derivative(u), base.norm);
    EXPECT_LT(numerical_rank(s.a, 1e-8), 14);
  }
}

TEST(Optimizer, EquivariantUnderScalingOfData)
{
  std::mt19937_64 rng(37);
  const int n = 32;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const SbpOperator target = make_blocknorm_target(n, 1.0 / n);
  const Eigen::VectorXd x = abscissae(n, 1.0 / n);
  const Eigen::VectorXd u = random_smooth(x, rng);
  const double alpha = -4.0;
  const Eigen::MatrixXd q1 = optimize_block_operator(u, base, target, {}, &x).dense_q();
  const Eigen::MatrixXd q2 = optimize_block_operator(alpha * u, base, target, {}, &x).dense_q();
  EXPECT_LE((q1 - q2).cwiseAbs().maxCoeff(), 1e-9);

  const LsStage s1 = build_stage(u, target.derivative(u), base.norm);
  const LsStage s2 = build_stage(alpha * u, target.derivative(alpha * u), base.norm);
  const StencilVector w1 = lexicographic_lsq(std::span<const LsStage>(&s1, 1), OptimizerConfig{});
  const StencilVector w2 = lexicographic_lsq(std::span<const LsStage>(&s2, 1), OptimizerConfig{});
  EXPECT_NEAR(stage_residual(s2, w2), std::abs(alpha) * stage_residual(s1, w1), 1e-10);
}

TEST(Optimizer, DiagnosticsReportThreeStages)
{
  std::mt19937_64 rng(41);
  const int n = 40;
  const SbpOperator base = make_sbp42(n, 1.0 / n);
  const SbpOperator target = make_blocknorm_target(n, 1.0 / n);
  const Eigen::VectorXd x = abscissae(n, 1.0 / n);
  LexicographicDiagnostics diag;
  optimize_block_operator(random_smooth(x, rng), base, target, {}, &x, &diag);
  ASSERT_EQ(diag.ranks.size(), 3u);
  EXPECT_EQ(diag.singular_values.size(), 3u);
  EXPECT_GE(diag.remaining_freedom, 0);
  std::ostringstream os;
  write_singular_values_csv(os, diag);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, 17), "stage,rank,sigma_");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Optimizer, RejectsMismatchedInputs)
{
  const SbpOperator base = make_sbp42(16, 1.0 / 16);
  const SbpOperator other = make_blocknorm_target(20, 1.0 / 20);
  EXPECT_THROW(optimize_block_operator(Eigen::VectorXd::Ones(17), base, other, {}), std::invalid_argument);
  EXPECT_THROW(optimize_block_operator(Eigen::VectorXd::Ones(5), base, make_blocknorm_target(16, 1.0 / 16), {}),
               std::invalid_argument);
  OptimizerConfig bad;
  bad.rank_tol = 0.0;
  EXPECT_THROW(optimize_block_operator(Eigen::VectorXd::Ones(17), base, make_blocknorm_target(16, 1.0 / 16), bad),
               std::invalid_argument);
}

}  // namespace
}  // namespace sbpsat
