#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "uavfog/error.hpp"
#include "uavfog/geometry.hpp"
#include "uavfog/rng.hpp"

namespace uavfog {

struct Cell {
  int x = 0, y = 0, z = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// The 26 unit offsets of a 3D Moore neighbourhood, in a fixed order; the
/// position in this table is the direction id used for edge indexing.
inline const std::array<Cell, 26>& moore_offsets() {
  static const std::array<Cell, 26> table = [] {
    std::array<Cell, 26> t{};
    int k = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx || dy || dz) t[k++] = Cell{dx, dy, dz};
    return t;
  }();
  return table;
}

inline int direction_id(const Cell& from, const Cell& to) {
  const int dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
  if (std::abs(dx) > 1 || std::abs(dy) > 1 || std::abs(dz) > 1 || (!dx && !dy && !dz))
    return -1;
  const int raw = (dz + 1) * 9 + (dy + 1) * 3 + (dx + 1);
  return raw > 13 ? raw - 1 : raw;
}

struct TerrainDims {
  int nx = 0, ny = 0, nz = 0;
  double cell = 1.0;  // metres per cell edge, all axes
};

/// κ = (N_f − N_blocked) / N_f.
inline double safety_ratio(int n_scanned, int n_blocked) {
  if (n_scanned <= 0) throw DomainError("degenerate safety scan: no waypoint within scan radius");
  if (n_blocked < 0 || n_blocked > n_scanned)
    throw DomainError("blocked count outside [0, scanned]");
  return static_cast<double>(n_scanned - n_blocked) / n_scanned;
}

/// Discretised flight volume over a heightmap.
///
/// Column (ix, iy) has its centre at ((ix+0.5)c, (iy+0.5)c); layer iz sits at
/// z = iz·c so the bottom layer coincides with sea level. A cell is in the
/// no-fly set when its centre is at or below the surface, or above z_max.
class TerrainGrid {
public:
  TerrainGrid() = default;

  TerrainGrid(TerrainDims dims, std::vector<double> heights, double z_max)
      : dims_(dims), heights_(std::move(heights)), z_max_(z_max) {
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0 || !(dims_.cell > 0.0))
      throw DomainError("terrain dimensions must be positive");
    if (heights_.size() != static_cast<std::size_t>(dims_.nx) * dims_.ny)
      throw DomainError("heightmap size does not match grid columns");
    rebuild();
  }

  const TerrainDims& dims() const { return dims_; }
  int nx() const { return dims_.nx; }
  int ny() const { return dims_.ny; }
  int nz() const { return dims_.nz; }
  double cell() const { return dims_.cell; }
  double z_max() const { return z_max_; }
  std::size_t cell_count() const { return blocked_.size(); }

  bool in_grid(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims_.nx && c.y < dims_.ny &&
           c.z < dims_.nz;
  }
  std::size_t index(const Cell& c) const {
    return (static_cast<std::size_t>(c.z) * dims_.ny + c.y) * dims_.nx + c.x;
  }
  Cell cell_at(std::size_t idx) const {
    const int x = static_cast<int>(idx % dims_.nx);
    const int y = static_cast<int>((idx / dims_.nx) % dims_.ny);
    const int z = static_cast<int>(idx / (static_cast<std::size_t>(dims_.nx) * dims_.ny));
    return {x, y, z};
  }

  Vec3 center(const Cell& c) const {
    return {(c.x + 0.5) * dims_.cell, (c.y + 0.5) * dims_.cell, c.z * dims_.cell};
  }

  double column_height(int ix, int iy) const {
    return heights_[static_cast<std::size_t>(iy) * dims_.nx + ix];
  }
  const std::vector<double>& heights() const { return heights_; }

  /// Continuous surface: bilinear interpolation between column centres,
  /// clamped at the borders.
  double height_at(double x, double y) const {
    const double fx = std::clamp(x / dims_.cell - 0.5, 0.0, dims_.nx - 1.0);
    const double fy = std::clamp(y / dims_.cell - 0.5, 0.0, dims_.ny - 1.0);
    const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
    const int x1 = std::min(x0 + 1, dims_.nx - 1), y1 = std::min(y0 + 1, dims_.ny - 1);
    const double tx = fx - x0, ty = fy - y0;
    const double a = column_height(x0, y0) * (1 - tx) + column_height(x1, y0) * tx;
    const double b = column_height(x0, y1) * (1 - tx) + column_height(x1, y1) * tx;
    return a * (1 - ty) + b * ty;
  }

  /// In O or above the ceiling. Out-of-grid cells count as blocked.
  bool blocked(const Cell& c) const { return !in_grid(c) || blocked_[index(c)]; }
  bool feasible(const Cell& c) const { return !blocked(c); }

  /// Number of in-grid cells in the no-fly set O (at or below the surface).
  std::size_t no_fly_count() const { return no_fly_count_; }

  /// Feasible 26-connected neighbours.
  std::vector<Cell> neighbors(const Cell& c) const {
    std::vector<Cell> out;
    out.reserve(26);
    for (const Cell& d : moore_offsets()) {
      const Cell n{c.x + d.x, c.y + d.y, c.z + d.z};
      if (feasible(n)) out.push_back(n);
    }
    return out;
  }

  struct ScanCounts {
    int scanned = 0;
    int blocked = 0;
  };

  /// Counts waypoints within `radius` of `from` inside the 90° cone around
  /// from→to, and how many of them are infeasible.
  ScanCounts scan(const Cell& from, const Cell& to, double radius) const {
    const Vec3 dir{double(to.x - from.x), double(to.y - from.y), double(to.z - from.z)};
    const double dn = dir.norm();
    if (dn == 0.0) throw DomainError("safety scan needs distinct waypoints");
    const double r = radius / dims_.cell;
    const int reach = static_cast<int>(std::floor(r + 1e-9));
    const double cos_half = std::cos(std::numbers::pi / 4.0) - 1e-12;
    ScanCounts out;
    for (int dz = -reach; dz <= reach; ++dz)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
          if (!dx && !dy && !dz) continue;
          const Vec3 off{double(dx), double(dy), double(dz)};
          const double on = off.norm();
          if (on > r + 1e-9) continue;
          if (off.dot(dir) < cos_half * on * dn) continue;
          const Cell c{from.x + dx, from.y + dy, from.z + dz};
          if (!in_grid(c)) continue;
          ++out.scanned;
          if (blocked_[index(c)]) ++out.blocked;
        }
    return out;
  }

  double safety_value(const Cell& from, const Cell& to, double radius) const {
    if (!(radius > 0.0)) throw DomainError("scan radius must be positive");
    const auto counts = scan(from, to, radius);
    return safety_ratio(counts.scanned, counts.blocked);
  }

  /// Lowest feasible cell in the column containing (x, y); nullopt-like
  /// sentinel (z = -1) when the whole column is blocked.
  Cell lowest_free_in_column(double x, double y) const {
    const int ix = std::clamp(static_cast<int>(std::floor(x / dims_.cell)), 0, dims_.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(y / dims_.cell)), 0, dims_.ny - 1);
    for (int iz = 0; iz < dims_.nz; ++iz)
      if (feasible(Cell{ix, iy, iz})) return Cell{ix, iy, iz};
    return Cell{ix, iy, -1};
  }

  /// Nearest feasible waypoint to a point (ties broken by index order).
  Cell nearest_feasible(const Vec3& p) const {
    Cell col = lowest_free_in_column(p.x, p.y);
    if (col.z >= 0) return col;
    double best = std::numeric_limits<double>::infinity();
    Cell out{-1, -1, -1};
    for (std::size_t i = 0; i < blocked_.size(); ++i) {
      if (blocked_[i]) continue;
      const Cell c = cell_at(i);
      const double d = distance(center(c), p);
      if (d < best) {
        best = d;
        out = c;
      }
    }
    return out;
  }

  /// Connected component labels of the feasible cells (-1 for blocked).
  std::vector<int> components() const {
    std::vector<int> label(blocked_.size(), -1);
    int next = 0;
    std::deque<std::size_t> queue;
    for (std::size_t s = 0; s < blocked_.size(); ++s) {
      if (blocked_[s] || label[s] >= 0) continue;
      label[s] = next;
      queue.push_back(s);
      while (!queue.empty()) {
        const Cell c = cell_at(queue.front());
        queue.pop_front();
        for (const Cell& n : neighbors(c)) {
          const auto ni = index(n);
          if (label[ni] < 0) {
            label[ni] = next;
            queue.push_back(ni);
          }
        }
      }
      ++next;
    }
    return label;
  }

  /// Highest column height, used for the unplanned cruise altitude.
  double max_height() const { return *std::max_element(heights_.begin(), heights_.end()); }

  /// Marks an extra in-grid cell infeasible (fixture construction).
  void block(const Cell& c) {
    if (!in_grid(c)) return;
    if (!blocked_[index(c)]) {
      blocked_[index(c)] = 1;
      ++no_fly_count_;
    }
  }

private:
  void rebuild() {
    blocked_.assign(static_cast<std::size_t>(dims_.nx) * dims_.ny * dims_.nz, 0);
    no_fly_count_ = 0;
    for (int iz = 0; iz < dims_.nz; ++iz)
      for (int iy = 0; iy < dims_.ny; ++iy)
        for (int ix = 0; ix < dims_.nx; ++ix) {
          const Cell c{ix, iy, iz};
          const double z = center(c).z;
          const bool below = z <= column_height(ix, iy);
          if (below) ++no_fly_count_;
          if (below || z > z_max_) blocked_[index(c)] = 1;
        }
  }

  TerrainDims dims_;
  std::vector<double> heights_;
  double z_max_ = 0.0;
  std::vector<unsigned char> blocked_;
  std::size_t no_fly_count_ = 0;
};

namespace detail {

inline double lattice_value(std::uint64_t seed, int octave, long lx, long ly) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(octave) + 1));
  h = splitmix64(h ^ static_cast<std::uint64_t>(lx) * 0x9e3779b97f4a7c15ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(ly) * 0xc2b2ae3d27d4eb4fULL);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace detail

/// Smoothed value noise over the columns, rescaled to span [0, max_height].
inline TerrainGrid generate_terrain(std::uint64_t seed, TerrainDims dims, double max_height,
                                    double feature_size, int octaves, double z_max) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw DomainError("terrain dimensions must be positive");
  if (max_height < 0.0 || max_height >= z_max)
    throw DomainError("terrain max height must lie in [0, z_max)");
  std::vector<double> h(static_cast<std::size_t>(dims.nx) * dims.ny, 0.0);
  for (int iy = 0; iy < dims.ny; ++iy)
    for (int ix = 0; ix < dims.nx; ++ix) {
      const double x = (ix + 0.5) * dims.cell, y = (iy + 0.5) * dims.cell;
      double v = 0.0, amp = 1.0, spacing = feature_size;
      for (int o = 0; o < octaves; ++o) {
        const double gx = x / spacing, gy = y / spacing;
        const long lx = static_cast<long>(std::floor(gx)), ly = static_cast<long>(std::floor(gy));
        const double tx = detail::smoothstep(gx - lx), ty = detail::smoothstep(gy - ly);
        const double v00 = detail::lattice_value(seed, o, lx, ly);
        const double v10 = detail::lattice_value(seed, o, lx + 1, ly);
        const double v01 = detail::lattice_value(seed, o, lx, ly + 1);
        const double v11 = detail::lattice_value(seed, o, lx + 1, ly + 1);
        const double a = v00 + (v10 - v00) * tx, b = v01 + (v11 - v01) * tx;
        v += amp * (a + (b - a) * ty);
        amp *= 0.5;
        spacing *= 0.5;
      }
      h[static_cast<std::size_t>(iy) * dims.nx + ix] = v;
    }
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  const double vmin = *lo, span = *hi - *lo;
  for (double& v : h) v = span > 0.0 ? max_height * (v - vmin) / span : 0.0;
  return TerrainGrid(dims, std::move(h), z_max);
}

/// Plain-text matrix: one row per y, columns are x, values in metres.
inline void write_heightmap(std::ostream& os, const TerrainGrid& grid) {
  os << std::setprecision(17);
  for (int iy = 0; iy < grid.ny(); ++iy) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      if (ix) os << ' ';
      os << grid.column_height(ix, iy);
    }
    os << '\n';
  }
}

/// Reads a heightmap matrix; returns row-major heights and sets nx/ny.
inline std::vector<double> read_heightmap(std::istream& is, int& nx, int& ny) {
  std::vector<double> out;
  std::string line;
  nx = -1;
  ny = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw DomainError("malformed heightmap row " + std::to_string(ny + 1));
    if (row.empty()) continue;
    if (nx >= 0 && static_cast<int>(row.size()) != nx)
      throw DomainError("ragged heightmap row " + std::to_string(ny + 1));
    nx = static_cast<int>(row.size());
    out.insert(out.end(), row.begin(), row.end());
    ++ny;
  }
  if (ny == 0) throw DomainError("empty heightmap");
  return out;
}

}  // namespace uavfog
