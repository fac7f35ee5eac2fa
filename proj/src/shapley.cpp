#include "narrmap/shapley.hpp"

#include "narrmap/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace narrmap {

CosineGame::CosineGame(const Eigen::MatrixXd& players, const Eigen::VectorXd& target)
    : gram_(players.transpose() * players), dots_(players.transpose() * target), target_norm_(target.norm()) {
  if (players.rows() != target.size()) fail(ErrorKind::invalid_input, "player and target dimensions differ");
}

double cosine_value(double numerator, double norm_sq, double target_norm) {
  if (norm_sq <= 0 || target_norm <= 0) return 0.0;
  return std::max(0.0, numerator / (std::sqrt(norm_sq) * target_norm));
}

double CosineGame::value(std::uint64_t mask) const {
  const auto n = player_count();
  double num = 0;
  double norm_sq = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!((mask >> p) & 1u)) continue;
    num += dot(p);
    for (std::size_t q = 0; q < n; ++q)
      if ((mask >> q) & 1u) norm_sq += gram(p, q);
  }
  return cosine_value(num, norm_sq, target_norm_);
}

double CosineGame::grand_value() const {
  const auto n = player_count();
  return value(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
}

std::vector<double> shapley_exact(const CosineGame& game) {
  const auto n = game.player_count();
  if (n > 24) fail(ErrorKind::invalid_input, "exact Shapley enumeration is limited to 24 players");
  std::vector<double> phi(n, 0.0);
  if (n == 0) return phi;
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> v(total);
  for (std::uint64_t mask = 0; mask < total; ++mask) v[mask] = game.value(mask);
  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s)
    weight[s] = std::exp(std::lgamma(double(s) + 1) + std::lgamma(double(n - s)) - std::lgamma(double(n) + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    double acc = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      if (mask & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
    }
    phi[i] = acc;
  }
  return phi;
}

std::vector<double> shapley_permutation(const CosineGame& game, std::size_t permutations, std::uint64_t seed) {
  const auto n = game.player_count();
  std::vector<double> phi(n, 0.0);
  if (n == 0 || permutations == 0) return phi;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> members;
  for (std::size_t r = 0; r < permutations; ++r) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    members.clear();
    double num = 0, norm_sq = 0, prev = 0;
    for (auto p : order) {
      num += game.dot(p);
      double cross = 0;
      for (auto q : members) cross += game.gram(p, q);
      norm_sq += game.gram(p, p) + 2.0 * cross;
      members.push_back(p);
      const double cur = cosine_value(num, norm_sq, game.target_norm());
      phi[p] += cur - prev;
      prev = cur;
    }
  }
  for (auto& x : phi) x /= static_cast<double>(permutations);
  return phi;
}

}  // namespace narrmap
