#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace sbpsat {

enum class NormKind { Diagonal, Block };

/// SBP norm matrix P. Either diagonal, or diagonal with a dense symmetric 4x4
/// block in each corner (the right block is the index mirror of the left one).
class NormMatrix {
 public:
  static NormMatrix diagonal(Eigen::VectorXd weights)
  {
    if (weights.size() < 2) throw std::invalid_argument("NormMatrix: need at least two weights");
    if (!(weights.array() > 0.0).all()) {
      throw std::invalid_argument("NormMatrix: diagonal weights must be positive");
    }
    NormMatrix p;
    p.kind_ = NormKind::Diagonal;
    p.diag_ = std::move(weights);
    return p;
  }

  /// Block norm on N+1 points: `left` occupies rows/cols 0..3, its mirror
  /// P[N-i, N-j] = left(i, j) occupies the last four, and the rest is dx.
  static NormMatrix block(const Eigen::Matrix4d& left, int intervals, double dx)
  {
    if (intervals < 7) throw std::invalid_argument("NormMatrix: corner blocks overlap");
    if (!(dx > 0.0)) throw std::invalid_argument("NormMatrix: dx must be positive");
    if ((left - left.transpose()).cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("NormMatrix: corner block is not symmetric");
    }
    NormMatrix p;
    p.kind_ = NormKind::Block;
    p.left_ = left;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) p.right_(a, b) = left(3 - a, 3 - b);
    p.left_llt_.compute(p.left_);
    p.right_llt_.compute(p.right_);
    if (p.left_llt_.info() != Eigen::Success || p.right_llt_.info() != Eigen::Success) {
      throw std::invalid_argument("NormMatrix: corner block is not positive definite");
    }
    p.diag_ = Eigen::VectorXd::Constant(intervals + 1, dx);
    for (int i = 0; i < 4; ++i) {
      p.diag_[i] = p.left_(i, i);
      p.diag_[intervals - 3 + i] = p.right_(i, i);
    }
    return p;
  }

  NormKind kind() const { return kind_; }
  int size() const { return static_cast<int>(diag_.size()); }
  /// Main diagonal of P (corner-block diagonals included for the block kind).
  const Eigen::VectorXd& diagonal_entries() const { return diag_; }
  const Eigen::Matrix4d& left_block() const { return left_; }
  const Eigen::Matrix4d& right_block() const { return right_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const
  {
    check_size(v);
    Eigen::VectorXd out = diag_.cwiseProduct(v);
    if (kind_ == NormKind::Block) {
      out.head<4>() = left_ * v.head<4>();
      out.tail<4>() = right_ * v.tail<4>();
    }
    return out;
  }

  /// P^{-1} v.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const
  {
    check_size(v);
    Eigen::VectorXd out = v.cwiseQuotient(diag_);
    if (kind_ == NormKind::Block) {
      out.head<4>() = left_llt_.solve(Eigen::Vector4d(v.head<4>()));
      out.tail<4>() = right_llt_.solve(Eigen::Vector4d(v.tail<4>()));
    }
    return out;
  }

  /// v^T P v.
  double quadratic_form(const Eigen::VectorXd& v) const { return v.dot(apply(v)); }

  Eigen::MatrixXd dense() const
  {
    Eigen::MatrixXd m = diag_.asDiagonal();
    if (kind_ == NormKind::Block) {
      m.topLeftCorner<4, 4>() = left_;
      m.bottomRightCorner<4, 4>() = right_;
    }
    return m;
  }

  bool is_positive_definite() const
  {
    if (!(diag_.array() > 0.0).all()) return false;
    if (kind_ == NormKind::Diagonal) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> left_eig(left_, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> right_eig(right_, Eigen::EigenvaluesOnly);
    return left_eig.eigenvalues().minCoeff() > 0.0 && right_eig.eigenvalues().minCoeff() > 0.0;
  }

  /// Largest entrywise |P - other|; infinite when the shapes differ.
  double max_abs_difference(const NormMatrix& other) const
  {
    if (size() != other.size()) return INFINITY;
    if (kind_ == NormKind::Diagonal && other.kind_ == NormKind::Diagonal) {
      return (diag_ - other.diag_).cwiseAbs().maxCoeff();
    }
    return (dense() - other.dense()).cwiseAbs().maxCoeff();
  }

 private:
  NormMatrix() = default;

  void check_size(const Eigen::VectorXd& v) const
  {
    if (v.size() != diag_.size()) throw std::invalid_argument("NormMatrix: size mismatch");
  }

  NormKind kind_ = NormKind::Diagonal;
  Eigen::VectorXd diag_;
  Eigen::Matrix4d left_ = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d right_ = Eigen::Matrix4d::Zero();
  Eigen::LLT<Eigen::Matrix4d> left_llt_;
  Eigen::LLT<Eigen::Matrix4d> right_llt_;
};

}  // namespace sbpsat
