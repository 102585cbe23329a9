#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sbpsat {

/// Smallest block resolution for which the two four-row boundary closures and
/// their band couplings stay disjoint.
inline constexpr int kMinIntervals = 8;

inline void require_intervals(int intervals, const char* who)
{
  if (intervals < kMinIntervals) {
    throw std::invalid_argument(std::string(who) + ": N = " + std::to_string(intervals) +
                                " is below the minimum of " + std::to_string(kMinIntervals));
  }
}

/// A 1D domain split into K equal blocks of N intervals each. Interface
/// points are duplicated: the last abscissa of block k is the first of block k+1.
class BlockGrid {
 public:
  BlockGrid(int blocks, int intervals, double x_left = 0.0, double x_right = 1.0)
      : blocks_(blocks), intervals_(intervals), x_left_(x_left), x_right_(x_right)
  {
    if (blocks < 1) throw std::invalid_argument("BlockGrid: K must be >= 1");
    require_intervals(intervals, "BlockGrid");
    if (!(x_right > x_left)) throw std::invalid_argument("BlockGrid: empty domain");
  }

  int blocks() const { return blocks_; }
  int intervals() const { return intervals_; }
  int points_per_block() const { return intervals_ + 1; }
  double x_left() const { return x_left_; }
  double x_right() const { return x_right_; }
  double length() const { return x_right_ - x_left_; }
  double dx() const { return length() / (static_cast<double>(blocks_) * intervals_); }

  /// Abscissa of local point i in block k.
  double coordinate(int k, int i) const
  {
    return x_left_ + static_cast<double>(k * intervals_ + i) * dx();
  }

  Eigen::VectorXd block_coordinates(int k) const
  {
    Eigen::VectorXd x(points_per_block());
    for (int i = 0; i <= intervals_; ++i) x[i] = coordinate(k, i);
    return x;
  }

 private:
  int blocks_;
  int intervals_;
  double x_left_;
  double x_right_;
};

}  // namespace sbpsat
