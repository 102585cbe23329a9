#pragma once

#include "sbpsat/advection.hpp"
#include "sbpsat/csv.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbpsat {

struct ConvergenceRecord {
  int blocks = 0;
  int intervals = 0;
  double dx = 0.0;
  double error = 0.0;
  /// Observed order against the previous row; empty on the first row.
  std::optional<double> rate;
};

/// log(e_prev / e_cur) / log(N_cur / N_prev).
inline double observed_rate(double e_prev, double e_cur, int n_prev, int n_cur)
{
  return std::log(e_prev / e_cur) / std::log(static_cast<double>(n_cur) / n_prev);
}

inline void require_increasing(std::span<const int> intervals)
{
  if (intervals.empty()) throw std::invalid_argument("N list is empty");
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    require_intervals(intervals[i], "convergence study");
    if (i > 0 && intervals[i] <= intervals[i - 1]) {
      throw std::invalid_argument("N list must be strictly increasing");
    }
  }
}

/// One run per N at fixed K; final-time errors and pairwise observed rates.
inline std::vector<ConvergenceRecord> convergence_study(Mode mode, int blocks, std::span<const int> intervals,
                                                        SolverConfig config)
{
  require_increasing(intervals);
  config.mode = mode;
  RunOptions options;
  options.record_series = false;
  std::vector<ConvergenceRecord> records;
  for (const int n : intervals) {
    const BlockGrid grid(blocks, n);
    RunResult result;
    try {
      result = run(config, grid, options);
    } catch (const std::exception& e) {
      throw std::runtime_error("convergence study failed at N = " + std::to_string(n) + ": " + e.what());
    }
    ConvergenceRecord rec{blocks, n, 1.0 / (static_cast<double>(blocks) * n), result.final_error, std::nullopt};
    if (!records.empty()) {
      const auto& prev = records.back();
      if (prev.error > 0.0 && rec.error > 0.0) rec.rate = observed_rate(prev.error, rec.error, prev.intervals, n);
    }
    records.push_back(rec);
  }
  return records;
}

/// Error sampled at every re-optimization instant. Both modes use the same instants.
inline std::vector<ErrorSample> time_error_study(Mode mode, int blocks, int intervals, SolverConfig config)
{
  config.mode = mode;
  return run(config, BlockGrid(blocks, intervals)).series;
}

inline void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRecord> records)
{
  os << "K,N,dx,error,rate\n";
  for (const auto& r : records) {
    os << r.blocks << ',' << r.intervals << ',' << format_sci(r.dx) << ',' << format_sci(r.error) << ',';
    if (r.rate) os << format_sci(*r.rate);
    os << '\n';
  }
}

}  // namespace sbpsat
