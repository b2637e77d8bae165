#include "collapse/sample_pool.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace collapse {

std::size_t retrieval_count(std::size_t pool_size, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0,1]");
  return static_cast<std::size_t>(std::floor(beta * static_cast<double>(pool_size)));
}

SamplePool::SamplePool(std::vector<Vector> seed_items)
    : items_(std::move(seed_items)), origins_(items_.size(), Origin::seed()),
      seed_count_(items_.size()) {}

std::vector<std::size_t> SamplePool::draw_indices(std::size_t k, Rng& rng) const {
  const std::size_t n = items_.size();
  if (k > n)
    throw InvalidArgument("cannot draw " + std::to_string(k) + " items from a pool of " +
                          std::to_string(n));
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset in
  // uniform order.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<Vector> SamplePool::draw(std::size_t k, Rng& rng) const {
  std::vector<Vector> out;
  out.reserve(k);
  for (auto i : draw_indices(k, rng)) out.push_back(items_[i]);
  return out;
}

void SamplePool::post(std::span<const Vector> points, Origin origin) {
  if (points.empty()) throw InvalidArgument("post needs at least one item");
  if (origin.is_seed()) throw InvalidArgument("posted items must name a model");
  for (const auto& p : points) {
    if (!items_.empty() && p.size() != items_.front().size())
      throw InvalidArgument("posted item dimension does not match pool");
    items_.push_back(p);
    origins_.push_back(origin);
  }
}

double SamplePool::synthetic_fraction() const {
  if (items_.empty()) throw InvalidArgument("synthetic fraction of an empty pool");
  return static_cast<double>(synthetic_count()) / static_cast<double>(items_.size());
}

void SamplePool::write_csv(std::ostream& out) const {
  const std::size_t d = items_.empty() ? 0 : static_cast<std::size_t>(items_.front().size());
  out << "index,birth_time,origin";
  for (std::size_t j = 0; j < d; ++j) out << ",x" << j;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& o = origins_[i];
    out << i << ',' << o.birth_time << ',';
    if (o.is_seed())
      out << "seed";
    else
      out << o.model_id;
    for (Eigen::Index j = 0; j < items_[i].size(); ++j) out << ',' << items_[i][j];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace collapse
