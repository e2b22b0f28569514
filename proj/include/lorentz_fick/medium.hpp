#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "vec2.hpp"

namespace lorentz_fick {

/// Expected number of scatterer centres in a region of the given area.
inline double expected_count(const KineticParams& params, double region_area) {
  if (!(region_area >= 0.0)) throw DomainError("region area must be >= 0");
  return params.mu_eps() * region_area;
}

struct CellKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  friend bool operator==(CellKey, CellKey) = default;
};

struct CellKeyHash {
  std::size_t operator()(CellKey k) const noexcept {
    return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(k.ix) * 0x9e3779b97f4a7c15ULL ^
                                          static_cast<std::uint64_t>(k.iy)));
  }
};

struct ObstacleFieldOptions {
  double cell_size = 0.0;        // 0 selects 4 * radius
  double max_query_cells = 3.0;  // largest query radius, in cells
};

/// Poisson field of scatterer centres in the strip (0, L) x R, generated one
/// square cell at a time from a counter-based seed so that the content of a
/// cell depends only on (seed, ix, iy). Cells are memoized; concurrent
/// readers share the cache and racing writers insert identical data.
class ObstacleField {
 public:
  using Options = ObstacleFieldOptions;

  ObstacleField(double intensity, double L, double radius, std::uint64_t seed, Options opt = {})
      : intensity_(intensity), L_(L), radius_(radius), seed_(seed) {
    if (!(intensity >= 0.0)) throw DomainError("intensity must be >= 0");
    if (!(L > 0.0)) throw DomainError("L must be > 0");
    if (!(radius > 0.0)) throw DomainError("obstacle radius must be > 0");
    cell_size_ = opt.cell_size > 0.0 ? opt.cell_size : 4.0 * radius;
    if (cell_size_ < 2.0 * radius) throw DomainError("cell size must be >= obstacle diameter");
    max_query_radius_ = opt.max_query_cells * cell_size_;
    cell_mean_ = intensity_ * cell_size_ * cell_size_;
  }

  /// A field holding exactly the given centres (no random cells). Used for
  /// isolated-scatterer experiments.
  static ObstacleField fixed(double L, double radius, const std::vector<Vec2>& centres, Options opt = {}) {
    ObstacleField f(0.0, L, radius, 0, opt);
    f.fixed_ = true;
    for (const Vec2& c : centres) {
      if (!(c.x > 0.0 && c.x < L)) throw DomainError("fixed centres must lie inside the strip");
      auto& cell = f.cache_[f.cell_of(c)];
      if (!cell) cell = std::make_unique<std::vector<Vec2>>();
      cell->push_back(c);
    }
    return f;
  }

  /// Field with intensity mu_eps and support radius eps.
  static ObstacleField from_params(const KineticParams& p, std::uint64_t seed, Options opt = {}) {
    return ObstacleField(p.mu_eps(), p.L, p.epsilon, seed, opt);
  }

  ObstacleField(const ObstacleField& o)
      : intensity_(o.intensity_),
        L_(o.L_),
        radius_(o.radius_),
        seed_(o.seed_),
        cell_size_(o.cell_size_),
        max_query_radius_(o.max_query_radius_),
        cell_mean_(o.cell_mean_),
        fixed_(o.fixed_) {
    if (fixed_) {
      std::shared_lock lock(o.mutex_);
      for (const auto& [k, v] : o.cache_) cache_.emplace(k, std::make_unique<std::vector<Vec2>>(*v));
    }
  }

  ObstacleField(ObstacleField&& o) noexcept
      : intensity_(o.intensity_),
        L_(o.L_),
        radius_(o.radius_),
        seed_(o.seed_),
        cell_size_(o.cell_size_),
        max_query_radius_(o.max_query_radius_),
        cell_mean_(o.cell_mean_),
        fixed_(o.fixed_),
        cache_(std::move(o.cache_)) {}

  double intensity() const { return intensity_; }
  bool is_fixed() const { return fixed_; }
  double L() const { return L_; }
  double radius() const { return radius_; }
  double cell_size() const { return cell_size_; }
  double max_query_radius() const { return max_query_radius_; }
  std::uint64_t seed() const { return seed_; }

  CellKey cell_of(Vec2 x) const {
    return {static_cast<std::int64_t>(std::floor(x.x / cell_size_)),
            static_cast<std::int64_t>(std::floor(x.y / cell_size_))};
  }

  /// Centres in one cell, in generation order.
  const std::vector<Vec2>& cell(CellKey key) const {
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return *it->second;
    }
    auto generated = std::make_unique<std::vector<Vec2>>(generate(key));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(key, std::move(generated));
    return *it->second;
  }

  /// Calls fn(centre) for every centre within distance r of x. Cells are
  /// visited in (ix, iy) order, so the visiting order is deterministic.
  template <class Fn>
  void for_each_near(Vec2 x, double r, Fn&& fn) const {
    if (!(r <= max_query_radius_)) throw DomainError("query radius exceeds the configured maximum");
    if (intensity_ == 0.0 && !fixed_) return;
    const CellKey lo = cell_of({x.x - r, x.y - r});
    const CellKey hi = cell_of({x.x + r, x.y + r});
    const double r2 = r * r;
    for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix) {
      if ((ix + 1) * cell_size_ <= 0.0 || ix * cell_size_ >= L_) continue;
      for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy) {
        for (const Vec2& c : cell({ix, iy})) {
          if (norm2(c - x) <= r2) fn(c);
        }
      }
    }
  }

  std::vector<Vec2> obstacles_near(Vec2 x, double r) const {
    std::vector<Vec2> out;
    for_each_near(x, r, [&](Vec2 c) { out.push_back(c); });
    return out;
  }

  std::size_t cached_cells() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

  /// All centres in [x_lo, x_hi] x [y_lo, y_hi] as CSV rows "cx,cy".
  void write_window_csv(std::ostream& os, double y_lo, double y_hi) const {
    const auto old = os.precision(17);
    os << "cx,cy\n";
    const CellKey lo = cell_of({0.0, y_lo});
    const CellKey hi = cell_of({L_, y_hi});
    for (std::int64_t ix = lo.ix; ix <= hi.ix; ++ix)
      for (std::int64_t iy = lo.iy; iy <= hi.iy; ++iy)
        for (const Vec2& c : cell({ix, iy}))
          if (c.y >= y_lo && c.y <= y_hi) os << c.x << ',' << c.y << '\n';
    os.precision(old);
  }

 private:
  std::vector<Vec2> generate(CellKey key) const {
    std::vector<Vec2> out;
    if (cell_mean_ == 0.0) return out;
    const double x0 = key.ix * cell_size_;
    const double y0 = key.iy * cell_size_;
    if (x0 + cell_size_ <= 0.0 || x0 >= L_) return out;
    SplitMix64 rng(derive_seed(seed_, static_cast<std::uint64_t>(key.ix),
                               static_cast<std::uint64_t>(key.iy)));
    std::poisson_distribution<long> count(cell_mean_);
    const long n = count(rng);
    out.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
      const double cx = x0 + cell_size_ * rng.uniform();
      const double cy = y0 + cell_size_ * rng.uniform();
      // straddling cells: centres outside the strip do not exist
      if (cx > 0.0 && cx < L_) out.push_back({cx, cy});
    }
    return out;
  }

  double intensity_;
  double L_;
  double radius_;
  std::uint64_t seed_;
  double cell_size_ = 0.0;
  double max_query_radius_ = 0.0;
  double cell_mean_ = 0.0;
  bool fixed_ = false;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<CellKey, std::unique_ptr<std::vector<Vec2>>, CellKeyHash> cache_;
};

}  // namespace lorentz_fick
