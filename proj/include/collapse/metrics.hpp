#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collapse/gmm.hpp"

namespace collapse {

/// Componentwise average of equal-length vectors.
Vector mean_embedding(std::span<const Vector> vectors);

/// Symmetric, zero-diagonal matrix of pairwise Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Validates symmetry (to 1e-9 relative), a zero diagonal and non-negative
  /// finite entries.
  explicit DistanceMatrix(Matrix values);

  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& matrix() const { return values_; }
  double max_entry() const { return values_.size() ? values_.maxCoeff() : 0.0; }

 private:
  Matrix values_;
};

DistanceMatrix distance_matrix(std::span<const Vector> points);

/// Distance matrix between mixture-weight vectors.
DistanceMatrix distance_matrix(std::span<const MixtureWeights> weights);

double frobenius_norm(const DistanceMatrix& d);

struct CmdsResult {
  /// m rows, out_dim columns, centred at the origin.
  Matrix coordinates;
  /// Leading eigenvalues of the double-centred matrix, descending, before
  /// clipping.
  std::vector<double> eigenvalues;
  /// True when any kept eigenvalue was negative and clipped to zero.
  bool clipped_negative = false;
};

/// Classical multidimensional scaling: eigendecompose -1/2 J (D o D) J and
/// scale the top eigenvectors by sqrt(eigenvalue). Each eigenvector's sign is
/// fixed so its largest-magnitude entry is positive.
CmdsResult cmds_project(const Matrix& distances, std::size_t out_dim = 2);

}  // namespace collapse
