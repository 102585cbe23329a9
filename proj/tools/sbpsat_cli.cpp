// Command-line driver: convergence studies, time-error series and the
// property validation suite.
//
// Exit codes: 0 success, 1 validation or run failure, 2 usage error.

#include "sbpsat/harness.hpp"
#include "sbpsat/validation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string study;
  sbpsat::Mode mode = sbpsat::Mode::Adaptive;
  int blocks = 4;
  std::vector<int> intervals;
  double final_time = 1.0;
  double theta = 1.0;
  double retau_factor = 0.5;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::string out;
};

sbpsat::SolverConfig make_config(const Options& opt)
{
  sbpsat::SolverConfig config;
  config.mode = opt.mode;
  config.theta = opt.theta;
  config.retau_factor = opt.retau_factor;
  config.abs_tol = opt.abs_tol;
  config.rel_tol = opt.rel_tol;
  config.final_time = opt.final_time;
  return config;
}

int run_study(const Options& opt, std::ostream& csv)
{
  const sbpsat::SolverConfig config = make_config(opt);
  if (opt.study == "convergence") {
    const std::vector<int> intervals = opt.intervals.empty() ? std::vector<int>{20, 40, 80, 160} : opt.intervals;
    const auto records = sbpsat::convergence_study(opt.mode, opt.blocks, intervals, config);
    sbpsat::write_convergence_csv(csv, records);
    return 0;
  }
  if (opt.study == "time-error") {
    if (opt.intervals.size() > 1) {
      std::cerr << "sbpsat: --study time-error takes a single --N value\n";
      return kExitUsage;
    }
    const int n = opt.intervals.empty() ? 80 : opt.intervals.front();
    sbpsat::write_time_error_csv(csv, sbpsat::time_error_study(opt.mode, opt.blocks, n, config));
    return 0;
  }
  const auto report = sbpsat::run_validation();
  sbpsat::print_validation(csv, report);
  return report.passed() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv)
{
  Options opt;
  CLI::App app{"Stencil-adaptive SBP-SAT solver for periodic linear advection"};
  app.add_option("--study", opt.study, "What to run")
      ->required()
      ->check(CLI::IsMember({"convergence", "time-error", "validate"}));
  const std::map<std::string, sbpsat::Mode> modes{{"conventional", sbpsat::Mode::Conventional},
                                                  {"adaptive", sbpsat::Mode::Adaptive}};
  app.add_option("--mode", opt.mode, "Stencil mode")->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  app.add_option("--K", opt.blocks, "Number of blocks")->check(CLI::PositiveNumber);
  app.add_option("--N", opt.intervals, "Intervals per block, comma separated")->delimiter(',');
  app.add_option("--T", opt.final_time, "Final time")->check(CLI::NonNegativeNumber);
  app.add_option("--theta", opt.theta, "SAT parameter")->check(CLI::NonNegativeNumber);
  app.add_option("--retau-factor", opt.retau_factor, "c in dtau = c / (K (N+1))")->check(CLI::PositiveNumber);
  app.add_option("--abs-tol", opt.abs_tol, "Absolute integrator tolerance")->check(CLI::PositiveNumber);
  app.add_option("--rel-tol", opt.rel_tol, "Relative integrator tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sbpsat: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (opt.out.empty()) return run_study(opt, std::cout);
    std::ofstream file(opt.out);
    if (!file) {
      std::cerr << "sbpsat: cannot open " << opt.out << " for writing\n";
      return kExitFailure;
    }
    const int code = run_study(opt, file);
    return file ? code : kExitFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sbpsat: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "sbpsat: " << e.what() << '\n';
    return kExitFailure;
  }
}
