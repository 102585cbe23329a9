#pragma once

#include "sbpsat/dormand_prince.hpp"
#include "sbpsat/grid.hpp"
#include "sbpsat/sbp_operator.hpp"
#include "sbpsat/stencil_opt.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbpsat {

/// Solution on K blocks of N+1 points. Interface points are separate degrees
/// of freedom in each adjacent block and need not agree.
struct MultiBlockState {
  double t = 0.0;
  std::vector<Eigen::VectorXd> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }
};

enum class Mode { Conventional, Adaptive };

inline const char* to_string(Mode mode) { return mode == Mode::Conventional ? "conventional" : "adaptive"; }

struct SolverConfig {
  double theta = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Re-optimization interval is retau_factor / (K (N+1)).
  double retau_factor = 0.5;
  double final_time = 1.0;
  Mode mode = Mode::Adaptive;
  OptimizerConfig optimizer;

  void validate() const
  {
    if (!(theta >= 0.0)) throw std::invalid_argument("SolverConfig: theta must be >= 0");
    if (!(abs_tol > 0.0 && rel_tol > 0.0)) throw std::invalid_argument("SolverConfig: tolerances must be > 0");
    if (!(retau_factor > 0.0)) throw std::invalid_argument("SolverConfig: retau_factor must be > 0");
    if (!(final_time >= 0.0)) throw std::invalid_argument("SolverConfig: final time must be >= 0");
    optimizer.validate();
  }
};

/// u(x, t) = sin(2 pi (x - t)) + cos(4 pi (x - t)) / 2, one-periodic on [0, 1].
inline double exact_solution(double x, double t)
{
  const double s = x - t;
  return std::sin(2.0 * std::numbers::pi * s) + 0.5 * std::cos(4.0 * std::numbers::pi * s);
}

using ExactSolution = std::function<double(double x, double t)>;

inline MultiBlockState sample_state(const BlockGrid& grid, const ExactSolution& f, double t)
{
  MultiBlockState s;
  s.t = t;
  for (int k = 0; k < grid.blocks(); ++k) {
    Eigen::VectorXd u(grid.points_per_block());
    for (int i = 0; i <= grid.intervals(); ++i) u[i] = f(grid.coordinate(k, i), t);
    s.blocks.push_back(std::move(u));
  }
  return s;
}

namespace detail {

inline void check_conforming(std::span<const SbpOperator> ops, Eigen::Index block_size, std::size_t blocks)
{
  if (ops.size() != blocks || ops.empty()) throw std::invalid_argument("advection: operator count != block count");
  for (const auto& op : ops) {
    if (op.size() != block_size) throw std::invalid_argument("advection: operator does not match block size");
  }
}

}  // namespace detail

/// Periodic multiblock SBP-SAT semidiscretization of u_t + u_x = 0 on a flat
/// vector: block k occupies [k (N+1), (k+1)(N+1)).
class Semidiscretization {
 public:
  Semidiscretization(std::vector<SbpOperator> ops, double theta) : ops_(std::move(ops)), theta_(theta)
  {
    if (ops_.empty()) throw std::invalid_argument("Semidiscretization: no operators");
    for (const auto& op : ops_) {
      if (op.size() != ops_.front().size()) throw std::invalid_argument("Semidiscretization: unequal blocks");
    }
  }

  const std::vector<SbpOperator>& operators() const { return ops_; }
  std::vector<SbpOperator>& operators() { return ops_; }
  int block_size() const { return ops_.front().size(); }
  Eigen::Index state_size() const { return static_cast<Eigen::Index>(ops_.size()) * block_size(); }

  void operator()(double /*t*/, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) const
  {
    const int n1 = block_size();
    const int count = static_cast<int>(ops_.size());
    if (y.size() != state_size()) throw std::invalid_argument("Semidiscretization: state size mismatch");
    dydt.resize(y.size());
    const double left_weight = -0.5 * (1.0 + theta_);
    const double right_weight = 0.5 * (1.0 - theta_);
    for (int k = 0; k < count; ++k) {
      const int prev = (k + count - 1) % count;
      const int next = (k + 1) % count;
      const auto u = y.segment(k * n1, n1);
      const double jump_left = u[0] - y[prev * n1 + n1 - 1];
      const double jump_right = u[n1 - 1] - y[next * n1];
      Eigen::VectorXd g = -(ops_[k].q * u);
      g[0] += left_weight * jump_left;
      g[n1 - 1] += right_weight * jump_right;
      dydt.segment(k * n1, n1) = ops_[k].norm.solve(g);
    }
  }

 private:
  std::vector<SbpOperator> ops_;
  double theta_;
};

inline Eigen::VectorXd flatten(const MultiBlockState& s)
{
  if (s.blocks.empty()) return {};
  const Eigen::Index n1 = s.blocks.front().size();
  Eigen::VectorXd y(n1 * static_cast<Eigen::Index>(s.blocks.size()));
  for (std::size_t k = 0; k < s.blocks.size(); ++k) {
    if (s.blocks[k].size() != n1) throw std::invalid_argument("MultiBlockState: unequal block lengths");
    y.segment(static_cast<Eigen::Index>(k) * n1, n1) = s.blocks[k];
  }
  return y;
}

inline MultiBlockState unflatten(const Eigen::VectorXd& y, int blocks, double t)
{
  MultiBlockState s;
  s.t = t;
  const Eigen::Index n1 = y.size() / blocks;
  for (int k = 0; k < blocks; ++k) s.blocks.emplace_back(y.segment(k * n1, n1));
  return s;
}

/// Tendency of every block: -D_k u_k plus the interface penalties.
inline std::vector<Eigen::VectorXd> rhs(const MultiBlockState& state, std::span<const SbpOperator> ops,
                                        double theta)
{
  if (state.blocks.empty()) throw std::invalid_argument("rhs: empty state");
  detail::check_conforming(ops, state.blocks.front().size(), state.blocks.size());
  Semidiscretization semi({ops.begin(), ops.end()}, theta);
  Eigen::VectorXd dydt;
  semi(state.t, flatten(state), dydt);
  return unflatten(dydt, state.block_count(), state.t).blocks;
}

/// sum_k u_k^T P_k u_k.
inline double energy(const MultiBlockState& state, std::span<const SbpOperator> ops)
{
  if (state.blocks.empty()) return 0.0;
  detail::check_conforming(ops, state.blocks.front().size(), state.blocks.size());
  double total = 0.0;
  for (std::size_t k = 0; k < ops.size(); ++k) total += ops[k].norm.quadratic_form(state.blocks[k]);
  return total;
}

struct EnergyRate {
  double lhs;  ///< d/dt of the energy along the semidiscrete flow
  double rhs;  ///< -theta * sum of squared interface jumps
};

inline EnergyRate energy_rate_identity(const MultiBlockState& state, std::span<const SbpOperator> ops,
                                       double theta)
{
  const auto tendency = rhs(state, ops, theta);
  const int count = state.block_count();
  EnergyRate out{0.0, 0.0};
  for (int k = 0; k < count; ++k) {
    out.lhs += 2.0 * state.blocks[k].dot(ops[k].norm.apply(tendency[k]));
    const auto& prev = state.blocks[(k + count - 1) % count];
    const double jump = state.blocks[k][0] - prev[prev.size() - 1];
    out.rhs -= theta * jump * jump;
  }
  return out;
}

/// An operator swap keeps the energy estimate iff the norm is unchanged.
inline bool check_transmission(const NormMatrix& before, const NormMatrix& after)
{
  return before.max_abs_difference(after) <= 1e-14;
}

inline MultiBlockState dp45_integrate(const MultiBlockState& state, std::span<const SbpOperator> ops,
                                      double theta, double t_end, double abs_tol, double rel_tol,
                                      Dp45Stats* stats = nullptr)
{
  if (state.blocks.empty()) throw std::invalid_argument("dp45_integrate: empty state");
  detail::check_conforming(ops, state.blocks.front().size(), state.blocks.size());
  const Semidiscretization semi({ops.begin(), ops.end()}, theta);
  Dp45Options opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = rel_tol;
  const Eigen::VectorXd y = dp45_integrate(semi, state.t, flatten(state), t_end, opt, stats);
  return unflatten(y, state.block_count(), t_end);
}

/// P-weighted discrete L2 distance to the exact solution at time t.
inline double l2_error(const MultiBlockState& state, std::span<const SbpOperator> ops, const BlockGrid& grid,
                       double t, const ExactSolution& exact = exact_solution)
{
  detail::check_conforming(ops, grid.points_per_block(), state.blocks.size());
  double total = 0.0;
  for (int k = 0; k < grid.blocks(); ++k) {
    Eigen::VectorXd e = state.blocks[k];
    for (int i = 0; i <= grid.intervals(); ++i) e[i] -= exact(grid.coordinate(k, i), t);
    total += ops[k].norm.quadratic_form(e);
  }
  return std::sqrt(total);
}

/// Re-optimization instants 0, dtau, 2 dtau, ..., T with dtau = c / (K (N+1));
/// the last interval is shortened to end on T.
inline std::vector<double> reoptimization_times(const SolverConfig& config, const BlockGrid& grid)
{
  const double dtau = config.retau_factor / (static_cast<double>(grid.blocks()) * grid.points_per_block());
  const double T = config.final_time;
  std::vector<double> times{0.0};
  if (T <= 0.0) return times;
  const double ratio = T / dtau;
  const double nearest = std::round(ratio);
  const long segments = static_cast<long>(
      std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio));
  for (long j = 1; j < segments; ++j) times.push_back(static_cast<double>(j) * dtau);
  times.push_back(T);
  return times;
}

struct ErrorSample {
  double t;
  double l2_error;
};

/// Replaces one block operator given the block data, the SBP(4,2) base, the
/// block-norm target and the block abscissae.
using BlockOptimizer = std::function<SbpOperator(const Eigen::VectorXd& u, const SbpOperator& base,
                                                 const SbpOperator& target, const Eigen::VectorXd& coords)>;

struct RunResult {
  MultiBlockState state;
  std::vector<SbpOperator> operators;
  std::vector<ErrorSample> series;
  long reoptimizations = 0;
  Dp45Stats stats;
  double final_error = 0.0;
};

struct RunOptions {
  /// Record the error at every re-optimization instant. Conventional runs
  /// without a series integrate 0 -> T in one pass.
  bool record_series = true;
  /// Adaptive mode only; defaults to optimize_block_operator with config.optimizer.
  BlockOptimizer optimizer;
  ExactSolution exact = exact_solution;
};

inline RunResult run(const SolverConfig& config, const BlockGrid& grid, const RunOptions& options = {})
{
  config.validate();
  const int count = grid.blocks();
  const SbpOperator base = make_sbp42(grid.intervals(), grid.dx());
  const SbpOperator target = make_blocknorm_target(grid.intervals(), grid.dx());
  std::vector<Eigen::VectorXd> coords;
  for (int k = 0; k < count; ++k) coords.push_back(grid.block_coordinates(k));

  BlockOptimizer optimizer = options.optimizer;
  if (!optimizer) {
    optimizer = [&cfg = config.optimizer](const Eigen::VectorXd& u, const SbpOperator& b, const SbpOperator& tg,
                                         const Eigen::VectorXd& x) {
      return optimize_block_operator(u, b, tg, cfg, &x);
    };
  }

  Semidiscretization semi(std::vector<SbpOperator>(static_cast<std::size_t>(count), base), config.theta);
  MultiBlockState initial = sample_state(grid, options.exact, 0.0);
  Eigen::VectorXd y = flatten(initial);
  double t = 0.0;

  Dp45Options opt;
  opt.abs_tol = config.abs_tol;
  opt.rel_tol = config.rel_tol;
  DormandPrince45 stepper(opt);
  RunResult result;

  auto sample = [&] {
    const MultiBlockState s = unflatten(y, count, t);
    result.series.push_back({t, l2_error(s, semi.operators(), grid, t, options.exact)});
  };

  const std::vector<double> times = reoptimization_times(config, grid);
  if (config.mode == Mode::Conventional && !options.record_series) {
    stepper.advance(semi, t, y, config.final_time);
  } else {
    const int n1 = grid.points_per_block();
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      if (config.mode == Mode::Adaptive) {
        for (int k = 0; k < count; ++k) {
          SbpOperator next = optimizer(y.segment(k * n1, n1), base, target, coords[k]);
          if (!check_transmission(semi.operators()[k].norm, next.norm)) {
            throw std::runtime_error("run: operator swap changes the norm of block " + std::to_string(k) +
                                     " at t = " + format_sci(t));
          }
          semi.operators()[k] = std::move(next);
        }
        ++result.reoptimizations;
      }
      if (options.record_series) sample();
      stepper.advance(semi, t, y, times[j + 1]);
    }
  }
  if (options.record_series) sample();

  result.state = unflatten(y, count, t);
  result.operators = semi.operators();
  result.stats = stepper.stats();
  result.final_error = l2_error(result.state, result.operators, grid, t, options.exact);
  return result;
}

inline void write_time_error_csv(std::ostream& os, std::span<const ErrorSample> series)
{
  os << "t,l2_error\n";
  for (const auto& s : series) os << format_sci(s.t) << ',' << format_sci(s.l2_error) << '\n';
}

}  // namespace sbpsat
