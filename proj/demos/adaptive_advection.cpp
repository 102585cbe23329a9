// Runs the conventional and the adaptive scheme side by side on one grid and
// prints the final-time errors.

#include "sbpsat/advection.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv)
{
  const int blocks = argc > 1 ? std::atoi(argv[1]) : 4;
  const int intervals = argc > 2 ? std::atoi(argv[2]) : 40;
  const sbpsat::BlockGrid grid(blocks, intervals);

  sbpsat::RunOptions options;
  options.record_series = false;
  for (auto mode : {sbpsat::Mode::Conventional, sbpsat::Mode::Adaptive}) {
    sbpsat::SolverConfig config;
    config.mode = mode;
    const auto result = sbpsat::run(config, grid, options);
    std::printf("%-12s K=%d N=%d  error=%.6e  steps=%ld rejected=%ld reoptimizations=%ld\n",
                sbpsat::to_string(mode), blocks, intervals, result.final_error, result.stats.accepted,
                result.stats.rejected, result.reoptimizations);
  }
  return 0;
}
