#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace narrmap {

/// The cooperative game behind keyword attributions: each player owns a
/// vector u_p and v(S) = max(0, cos(sum_{p in S} u_p, target)), v({}) = 0.
/// Values are evaluated from a precomputed Gram matrix, so the cost does not
/// depend on the embedding dimension.
class CosineGame {
 public:
  /// `players` holds one column per player.
  CosineGame(const Eigen::MatrixXd& players, const Eigen::VectorXd& target);

  std::size_t player_count() const { return static_cast<std::size_t>(dots_.size()); }
  /// v(S) for the coalition encoded by the low bits of `mask`; members are summed in index order.
  double value(std::uint64_t mask) const;
  double grand_value() const;

  double dot(std::size_t p) const { return dots_(static_cast<Eigen::Index>(p)); }
  double gram(std::size_t p, std::size_t q) const { return gram_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)); }
  double target_norm() const { return target_norm_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd dots_;
  double target_norm_ = 0;
};

double cosine_value(double numerator, double norm_sq, double target_norm);

/// Exact Shapley values by enumerating all 2^n coalitions (n <= 24).
std::vector<double> shapley_exact(const CosineGame& game);

/// Mean marginal contribution over `permutations` orderings drawn from a
/// std::mt19937_64 seeded with `seed`.
std::vector<double> shapley_permutation(const CosineGame& game, std::size_t permutations, std::uint64_t seed);

}  // namespace narrmap
