#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sbpsat {

struct Dp45Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// First trial step; 0 selects one automatically.
  double initial_step = 0.0;
  long max_steps = 50'000'000;
};

struct Dp45Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Embedded Dormand-Prince 5(4) pair with local extrapolation and the classical
/// step controller (safety 0.9, exponent 1/5, growth clamped to [0.2, 5]).
/// A step is accepted when the RMS of err_i / (abs_tol + rel_tol * max(|y_i|, |y_new_i|))
/// is at most one.
///
/// The stepper remembers its last step size, so a run split into segments
/// (e.g. around operator changes) continues without restarting the controller.
/// The right-hand side may change between advance() calls.
class DormandPrince45 {
 public:
  explicit DormandPrince45(Dp45Options options = {}) : opt_(options)
  {
    if (!(opt_.abs_tol > 0.0 && opt_.rel_tol > 0.0)) {
      throw std::invalid_argument("DormandPrince45: tolerances must be positive");
    }
  }

  const Dp45Stats& stats() const { return stats_; }
  double step_size() const { return h_; }

  /// Advances (t, y) to t_end; on return t == t_end exactly.
  /// rhs(t, y, dydt) must write dy/dt into dydt.
  template <class Rhs>
  void advance(Rhs&& rhs, double& t, Eigen::VectorXd& y, double t_end)
  {
    if (t_end < t) throw std::invalid_argument("DormandPrince45: t_end precedes t");
    if (!y.allFinite()) throw std::runtime_error("DormandPrince45: non-finite initial state");
    if (t_end == t) return;
    const Eigen::Index n = y.size();
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_}) k->resize(n);
    stage_.resize(n);
    y_new_.resize(n);

    eval(rhs, t, y, k1_);
    if (h_ <= 0.0) h_ = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(rhs, t, y, t_end);

    bool last_rejected = false;
    long steps = 0;
    while (t < t_end) {
      if (++steps > opt_.max_steps) throw std::runtime_error("DormandPrince45: step limit exceeded");
      const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
      if (h_ < min_step) {
        throw std::runtime_error("DormandPrince45: step size underflow at t = " + std::to_string(t) +
                                 " (problem may be stiff)");
      }
      double h = h_;
      bool clipped = false;
      if (t + 1.01 * h >= t_end) {
        h = t_end - t;
        clipped = true;
      }

      const double err = attempt(rhs, t, y, h);
      if (std::isfinite(err) && err <= 1.0) {
        ++stats_.accepted;
        t = clipped ? t_end : t + h;
        y.swap(y_new_);
        k1_.swap(k7_);  // first-same-as-last
        double factor = err > 0.0 ? kSafety * std::pow(err, -0.2) : kMaxGrowth;
        factor = std::clamp(factor, kMinGrowth, last_rejected ? 1.0 : kMaxGrowth);
        const double proposal = h * factor;
        h_ = clipped ? std::max(proposal, h_) : proposal;
        last_rejected = false;
      } else {
        ++stats_.rejected;
        const double factor = std::isfinite(err) ? std::max(kMinGrowth, kSafety * std::pow(err, -0.2)) : kMinGrowth;
        h_ = h * std::min(1.0, factor);
        last_rejected = true;
      }
    }
    if (!y.allFinite()) throw std::runtime_error("DormandPrince45: non-finite state");
  }

 private:
  static constexpr double kSafety = 0.9;
  static constexpr double kMinGrowth = 0.2;
  static constexpr double kMaxGrowth = 5.0;

  template <class Rhs>
  void eval(Rhs& rhs, double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)
  {
    rhs(t, y, dydt);
    ++stats_.rhs_evaluations;
  }

  double scaled_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& y) const
  {
    const Eigen::ArrayXd scale = opt_.abs_tol + opt_.rel_tol * y.array().abs();
    return std::sqrt((v.array() / scale).square().mean());
  }

  /// One trial step of size h from (t, y); fills y_new_ and k7_, returns the scaled error.
  template <class Rhs>
  double attempt(Rhs& rhs, double t, const Eigen::VectorXd& y, double h)
  {
    stage_ = y + h * (1.0 / 5.0) * k1_;
    eval(rhs, t + h / 5.0, stage_, k2_);
    stage_ = y + h * ((3.0 / 40.0) * k1_ + (9.0 / 40.0) * k2_);
    eval(rhs, t + 3.0 * h / 10.0, stage_, k3_);
    stage_ = y + h * ((44.0 / 45.0) * k1_ - (56.0 / 15.0) * k2_ + (32.0 / 9.0) * k3_);
    eval(rhs, t + 4.0 * h / 5.0, stage_, k4_);
    stage_ = y + h * ((19372.0 / 6561.0) * k1_ - (25360.0 / 2187.0) * k2_ + (64448.0 / 6561.0) * k3_ -
                      (212.0 / 729.0) * k4_);
    eval(rhs, t + 8.0 * h / 9.0, stage_, k5_);
    stage_ = y + h * ((9017.0 / 3168.0) * k1_ - (355.0 / 33.0) * k2_ + (46732.0 / 5247.0) * k3_ +
                      (49.0 / 176.0) * k4_ - (5103.0 / 18656.0) * k5_);
    eval(rhs, t + h, stage_, k6_);
    y_new_ = y + h * ((35.0 / 384.0) * k1_ + (500.0 / 1113.0) * k3_ + (125.0 / 192.0) * k4_ -
                      (2187.0 / 6784.0) * k5_ + (11.0 / 84.0) * k6_);
    eval(rhs, t + h, y_new_, k7_);

    stage_ = h * ((71.0 / 57600.0) * k1_ - (71.0 / 16695.0) * k3_ + (71.0 / 1920.0) * k4_ -
                  (17253.0 / 339200.0) * k5_ + (22.0 / 525.0) * k6_ - (1.0 / 40.0) * k7_);
    const Eigen::ArrayXd scale =
        opt_.abs_tol + opt_.rel_tol * y.array().abs().max(y_new_.array().abs());
    return std::sqrt((stage_.array() / scale).square().mean());
  }

  /// Starting step from the standard two-evaluation heuristic; k1_ holds f(t, y).
  template <class Rhs>
  double initial_step(Rhs& rhs, double t, const Eigen::VectorXd& y, double t_end)
  {
    const double d0 = scaled_rms(y, y);
    const double d1 = scaled_rms(k1_, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t);
    stage_ = y + h0 * k1_;
    eval(rhs, t + h0, stage_, k2_);
    const double d2 = scaled_rms(k2_ - k1_, y) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min(100.0 * h0, h1);
  }

  Dp45Options opt_;
  Dp45Stats stats_;
  double h_ = 0.0;
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, stage_, y_new_;
};

/// Integrates y' = rhs(t, y) from t0 to t_end.
template <class Rhs>
Eigen::VectorXd dp45_integrate(Rhs&& rhs, double t0, Eigen::VectorXd y0, double t_end,
                               const Dp45Options& options = {}, Dp45Stats* stats = nullptr)
{
  DormandPrince45 stepper(options);
  double t = t0;
  stepper.advance(rhs, t, y0, t_end);
  if (stats) *stats = stepper.stats();
  return y0;
}

}  // namespace sbpsat
