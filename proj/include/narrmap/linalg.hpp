#pragma once

// Small dense kernels shared by the vector-space modules. Everything is a
// free function over Eigen expressions so callers can pass blocks, rows and
// maps without copies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace narrmap {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Cosine similarity; zero when either side has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

template <typename Derived>
typename Derived::PlainObject l2_normalized(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = v.norm();
  if (n == Scalar(0)) return v;
  return v / n;
}

/// Normalizes every row to unit L2 norm in place; zero rows stay zero.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Scalar n = m.row(r).norm();
    if (n > Scalar(0)) m.row(r) /= n;
  }
}

/// Numerically stable softmax of `logits`.
template <typename Derived>
typename Derived::PlainObject softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  typename Derived::PlainObject out = logits;
  if (out.size() == 0) return out;
  const Scalar mx = out.maxCoeff();
  out = (out.array() - mx).exp().matrix();
  out /= out.sum();
  return out;
}

/// Full pairwise Euclidean distance matrix between rows.
template <typename Derived>
MatrixX<typename Derived::Scalar> pairwise_distances(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = rows.rows();
  MatrixX<Scalar> d = MatrixX<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar v = (rows.row(i) - rows.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

/// Projects rows onto their first two principal components. Each component's
/// sign is fixed so that its largest-magnitude feature loading is positive
/// (lowest feature index wins ties). Works through the n x n Gram matrix, so
/// cost is independent of the feature dimension.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 2> pca_2d(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = rows.rows();
  MatrixX<Scalar> centered = rows.rowwise() - rows.colwise().mean();
  MatrixX<Scalar> gram = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(gram);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>::Zero(n, 2);
  const auto& values = solver.eigenvalues();   // ascending
  const auto& vectors = solver.eigenvectors();
  const Scalar floor = n > 0 ? std::max(values(n - 1), Scalar(0)) * Scalar(1e-12) : Scalar(0);
  for (int c = 0; c < 2 && c < n; ++c) {
    const Eigen::Index k = n - 1 - c;
    const Scalar lambda = values(k);
    if (lambda <= floor || lambda <= Scalar(0)) continue;
    const Scalar sigma = std::sqrt(lambda);
    VectorX<Scalar> scores = vectors.col(k) * sigma;
    VectorX<Scalar> loading = centered.transpose() * vectors.col(k) / sigma;
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < loading.size(); ++j)
      if (std::abs(loading(j)) > std::abs(loading(arg))) arg = j;
    if (loading.size() > 0 && loading(arg) < Scalar(0)) scores = -scores;
    out.col(c) = scores;
  }
  return out;
}

}  // namespace narrmap
