#pragma once

#include "sbpsat/advection.hpp"
#include "sbpsat/sbp_operator.hpp"
#include "sbpsat/stencil_opt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace sbpsat {

/// Coefficients drawn uniformly from [-1, 1].
inline StencilVector random_stencil(std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  StencilVector w;
  for (int i = 0; i < StencilVector::kSize; ++i) w[i] = dist(rng);
  return w;
}

/// Random adaptive-labelled operator sharing the SBP(4,2) norm.
inline SbpOperator random_adaptive_operator(int intervals, double dx, std::mt19937_64& rng)
{
  const SbpOperator base = make_sbp42(intervals, dx);
  return SbpOperator{intervals, dx, base.norm, assemble_q(random_stencil(rng), intervals), OperatorKind::Adaptive};
}

inline MultiBlockState random_state(int blocks, int intervals, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MultiBlockState s;
  for (int k = 0; k < blocks; ++k) {
    Eigen::VectorXd u(intervals + 1);
    for (auto& v : u) v = dist(rng);
    s.blocks.push_back(std::move(u));
  }
  return s;
}

/// Smooth random block data: a few random low-frequency modes on [x0, x0 + L].
inline Eigen::VectorXd random_smooth(const Eigen::VectorXd& x, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(x.size());
  for (int m = 1; m <= 4; ++m) {
    const double a = amp(rng);
    const double p = phase(rng);
    u += (a * (2.0 * std::numbers::pi * m * x.array() + p).sin()).matrix();
  }
  return u;
}

struct ValidationItem {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;

  bool passed() const
  {
    return std::all_of(items.begin(), items.end(), [](const auto& i) { return i.passed; });
  }
  void add(std::string name, bool passed, std::string detail)
  {
    items.push_back({std::move(name), passed, std::move(detail)});
  }
};

/// Operator, energy and optimizer property checks on small grids.
inline ValidationReport run_validation(unsigned seed = 20210101u)
{
  ValidationReport report;
  std::mt19937_64 rng(seed);
  const int n = 16;
  const double dx = 1.0 / n;

  const SbpOperator sbp42 = make_sbp42(n, dx);
  const SbpOperator target = make_blocknorm_target(n, dx);

  {
    const OperatorReport r = validate_sbp(sbp42);
    const bool boundary = std::all_of(r.exactness_degrees.begin(), r.exactness_degrees.end(),
                                      [](int d) { return d >= 2; });
    bool interior = true;
    for (int i = 4; i <= n - 4; ++i) interior = interior && r.exactness_degrees[i] >= 4;
    report.add("sbp42 identity", r.sbp_identity_residual == 0.0,
               "SBP identity residual " + format_sci(r.sbp_identity_residual));
    report.add("sbp42 norm", r.norm_spd, r.norm_spd ? "P is SPD" : "P is not SPD");
    report.add("sbp42 exactness", boundary && interior,
               "all rows exact through degree 2, interior rows through degree 4");
  }
  {
    const OperatorReport r = validate_sbp(target);
    const bool exact3 = std::all_of(r.exactness_degrees.begin(), r.exactness_degrees.end(),
                                    [](int d) { return d >= 3; });
    report.add("target identity", r.sbp_identity_residual <= 1e-14,
               "SBP identity residual " + format_sci(r.sbp_identity_residual));
    report.add("target norm", r.norm_spd, r.norm_spd ? "block P is SPD" : "block P is not SPD");
    report.add("target exactness", exact3, "all rows exact through degree 3");
  }
  {
    double worst = 0.0;
    bool round_trip = true;
    for (int trial = 0; trial < 100; ++trial) {
      const SbpOperator op = random_adaptive_operator(n, dx, rng);
      worst = std::max(worst, sbp_identity_residual(op.q));
      round_trip = round_trip && assemble_q(extract_w(op), n).isApprox(op.q, 0.0);
    }
    report.add("random Q identity", worst <= 1e-14, "max residual over 100 random Q " + format_sci(worst));
    report.add("assemble/extract round trip", round_trip, "100 random stencils");
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int blocks = std::array{1, 3, 4}[trial % 3];
      const double theta = std::array{0.0, 1.0, 2.0}[(trial / 3) % 3];
      std::vector<SbpOperator> ops;
      for (int k = 0; k < blocks; ++k) {
        ops.push_back(k % 2 == 0 ? random_adaptive_operator(12, 1.0 / 12, rng) : make_sbp42(12, 1.0 / 12));
      }
      const MultiBlockState s = random_state(blocks, 12, rng);
      const EnergyRate e = energy_rate_identity(s, ops, theta);
      worst = std::max(worst, std::abs(e.lhs - e.rhs));
    }
    report.add("energy identity", worst <= 1e-11, "max |lhs - rhs| over 100 states " + format_sci(worst));
  }
  {
    Eigen::VectorXd x(n + 1);
    for (int i = 0; i <= n; ++i) x[i] = i * dx;
    const Eigen::VectorXd u = x.array().square();
    const SbpOperator adapted = optimize_block_operator(u, sbp42, target, OptimizerConfig{}, &x);
    const double dev = (adapted.dense_q() - sbp42.dense_q()).cwiseAbs().maxCoeff();
    report.add("optimizer recovers sbp42", dev <= 1e-8, "max |Q - Q42| for u = x^2: " + format_sci(dev));
    report.add("optimizer keeps P", check_transmission(sbp42.norm, adapted.norm), "P unchanged");
  }
  {
    const int m = 40;
    const SbpOperator base = make_sbp42(m, 1.0 / m);
    const SbpOperator tg = make_blocknorm_target(m, 1.0 / m);
    Eigen::VectorXd x(m + 1);
    for (int i = 0; i <= m; ++i) x[i] = i / static_cast<double>(m);
    int max_rank = 0;
    bool optimal = true;
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd u = random_smooth(x, rng);
      const LsStage s1 = build_stage(u, tg.derivative(u), base.norm);
      max_rank = std::max(max_rank, numerical_rank(s1.a, 1e-8));
      const auto stages = adaptive_stages(u, base, tg, x);
      const StencilVector w = lexicographic_lsq(stages, OptimizerConfig{});
      const double best = stage_residual(stages[0], w);
      optimal = optimal && best <= stage_residual(stages[0], sbp42_stencil()) + 1e-10;
      for (int r = 0; r < 5; ++r) optimal = optimal && best <= stage_residual(stages[0], random_stencil(rng)) + 1e-10;
    }
    report.add("stage rank deficiency", max_rank < StencilVector::kSize,
               "max numerical rank of A(u) over 20 smooth u: " + std::to_string(max_rank));
    report.add("stage-1 optimality", optimal, "optimized stage-1 residual <= SBP(4,2) and random stencils");
  }
  report.add("transmission check", check_transmission(sbp42.norm, sbp42.norm) &&
                                       !check_transmission(sbp42.norm, target.norm),
             "identical norms accepted, differing norms rejected");
  return report;
}

inline void print_validation(std::ostream& os, const ValidationReport& report)
{
  for (const auto& item : report.items) {
    os << (item.passed ? "PASS " : "FAIL ") << item.name << ": " << item.detail << '\n';
  }
  os << (report.passed() ? "validation passed\n" : "validation FAILED\n");
}

}  // namespace sbpsat
