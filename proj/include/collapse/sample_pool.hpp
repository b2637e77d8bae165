#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "collapse/gmm.hpp"

namespace collapse {

/// Where a pool item came from. Seed items carry model_id 0 and birth_time -1.
struct Origin {
  int model_id = 0;
  int birth_time = -1;

  bool is_seed() const { return model_id == 0; }
  static Origin seed() { return {}; }
  friend bool operator==(const Origin&, const Origin&) = default;
};

/// floor(beta * pool_size).
std::size_t retrieval_count(std::size_t pool_size, double beta);

/// Append-only multiset of points shared by all models, each tagged with its
/// origin. Insertion order is preserved so seeded draws are reproducible.
class SamplePool {
 public:
  SamplePool() = default;
  explicit SamplePool(std::vector<Vector> seed_items);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t seed_count() const { return seed_count_; }
  std::size_t synthetic_count() const { return items_.size() - seed_count_; }

  const Vector& item(std::size_t i) const { return items_.at(i); }
  const Origin& origin(std::size_t i) const { return origins_.at(i); }
  std::span<const Vector> items() const { return items_; }

  /// k distinct indices chosen uniformly without replacement.
  std::vector<std::size_t> draw_indices(std::size_t k, Rng& rng) const;
  std::vector<Vector> draw(std::size_t k, Rng& rng) const;

  void post(std::span<const Vector> points, Origin origin);

  /// Share of items not in the seed set. Throws on an empty pool.
  double synthetic_fraction() const;

  /// CSV with columns index, birth_time, origin, x0..x{d-1}. Seed rows use
  /// "seed" in the origin column.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<Vector> items_;
  std::vector<Origin> origins_;
  std::size_t seed_count_ = 0;
};

}  // namespace collapse
