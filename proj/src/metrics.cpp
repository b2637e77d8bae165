#include "collapse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace collapse {

Vector mean_embedding(std::span<const Vector> vectors) {
  if (vectors.empty()) throw InvalidArgument("mean of an empty set of vectors");
  Vector acc = Vector::Zero(vectors.front().size());
  for (const auto& v : vectors) {
    if (v.size() != acc.size()) throw InvalidArgument("ragged vector dimensions");
    acc += v;
  }
  return acc / static_cast<double>(vectors.size());
}

DistanceMatrix::DistanceMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) throw InvalidArgument("distance matrix must be square");
  if (!values_.allFinite()) throw InvalidArgument("distance matrix has non-finite entries");
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    if (values_(i, i) != 0.0) throw InvalidArgument("distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (values_(i, j) < 0.0) throw InvalidArgument("negative distance");
      if (std::abs(values_(i, j) - values_(j, i)) > 1e-9 * scale)
        throw InvalidArgument("distance matrix is not symmetric");
    }
  }
}

DistanceMatrix distance_matrix(std::span<const Vector> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 2) throw InvalidArgument("distance matrix needs at least two points");
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (points[i].size() != points[0].size()) throw InvalidArgument("dimension mismatch");
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (points[i] - points[j]).norm();
  }
  return DistanceMatrix(std::move(d));
}

DistanceMatrix distance_matrix(std::span<const MixtureWeights> weights) {
  std::vector<Vector> pts;
  pts.reserve(weights.size());
  for (const auto& w : weights) {
    const auto v = w.values();
    pts.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return distance_matrix(pts);
}

double frobenius_norm(const DistanceMatrix& d) { return d.matrix().norm(); }

CmdsResult cmds_project(const Matrix& distances, std::size_t out_dim) {
  const Eigen::Index m = distances.rows();
  if (distances.cols() != m) throw InvalidArgument("CMDS input must be square");
  if (out_dim == 0) throw InvalidArgument("CMDS output dimension must be positive");
  if (static_cast<std::size_t>(m) < out_dim + 1)
    throw InvalidArgument("CMDS needs at least out_dim + 1 items");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw InvalidArgument("CMDS input is not symmetric");

  const Matrix sq = distances.array().square().matrix();
  const Vector row_mean = sq.rowwise().mean();
  const Vector col_mean = sq.colwise().mean().transpose();
  const double grand = sq.mean();
  Matrix centred(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      centred(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
  centred = 0.5 * (centred + centred.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(centred);
  if (eig.info() != Eigen::Success) throw std::runtime_error("CMDS eigensolver failed");

  CmdsResult out;
  out.coordinates = Matrix::Zero(m, static_cast<Eigen::Index>(out_dim));
  // Eigen returns ascending eigenvalues.
  for (std::size_t k = 0; k < out_dim; ++k) {
    const Eigen::Index col = m - 1 - static_cast<Eigen::Index>(k);
    double lambda = eig.eigenvalues()(col);
    out.eigenvalues.push_back(lambda);
    if (lambda < 0.0) {
      out.clipped_negative = true;
      lambda = 0.0;
    }
    Vector v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.coordinates.col(static_cast<Eigen::Index>(k)) = v * std::sqrt(lambda);
  }
  return out;
}

}  // namespace collapse
