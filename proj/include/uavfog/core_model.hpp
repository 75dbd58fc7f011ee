#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "uavfog/config.hpp"
#include "uavfog/error.hpp"
#include "uavfog/geometry.hpp"
#include "uavfog/rng.hpp"
#include "uavfog/terrain.hpp"

namespace uavfog {

struct MobileDevice {
  int index = 0;
  Vec3 position;
  double arrival_rate = 0.0;  // tasks/s
  double p_min = 0.0, p_max = 0.0;
  double f_min = 0.0, f_max = 0.0;
};

struct TaskInstance {
  int md = 0;
  int index = 0;      // position within the device's stream
  double size = 0.0;  // bits
  double cycles_per_bit = 0.0;
  int slot = 0;
};

struct Timeline {
  int slots = 0;
  double slot_len = 0.0;
  double horizon() const { return slots * slot_len; }
};

/// Smallest slot count whose horizon covers `duration` seconds.
inline Timeline make_timeline(double duration, double slot_len) {
  if (!(slot_len > 0.0)) throw DomainError("slot length must be positive");
  if (duration < 0.0) throw DomainError("negative horizon");
  const double n = std::ceil(duration / slot_len - 1e-9);
  return {static_cast<int>(std::max(n, 1.0)), slot_len};
}

// RNG stream ids; keep stable, results depend on them.
namespace stream {
inline constexpr std::uint64_t terrain = 1;
inline constexpr std::uint64_t devices = 2;
inline constexpr std::uint64_t tasks = 3;
inline constexpr std::uint64_t planner = 4;
inline constexpr std::uint64_t swarm = 5;
inline constexpr std::uint64_t baseline = 6;
inline constexpr std::uint64_t epsilon = 7;
}  // namespace stream

inline TerrainDims terrain_dims(const ScenarioConfig& c) {
  const int n = static_cast<int>(std::lround(c.area_side / c.cell_size));
  const int nz = static_cast<int>(std::floor(c.area_height / c.cell_size + 1e-9)) + 1;
  if (n < 1) throw ConfigError("area_side smaller than one cell", "cell_size");
  return {n, n, nz, c.cell_size};
}

inline TerrainGrid make_terrain(const ScenarioConfig& c, const Rng& rng) {
  return generate_terrain(rng.child(stream::terrain).seed(), terrain_dims(c),
                          c.terrain_max_height, c.terrain_feature_size, c.terrain_octaves,
                          c.z_max);
}

/// Binomial point process with exactly K points over [0,S]², snapped onto the
/// surface. Device j draws from its own child stream.
inline std::vector<MobileDevice> generate_mds(const ScenarioConfig& c, const TerrainGrid& terrain,
                                              const Rng& rng) {
  std::vector<MobileDevice> out;
  out.reserve(c.num_mds);
  const Rng base = rng.child(stream::devices);
  for (int j = 0; j < c.num_mds; ++j) {
    Rng r = base.child(j);
    MobileDevice md;
    md.index = j;
    md.position.x = r.uniform(0.0, c.area_side);
    md.position.y = r.uniform(0.0, c.area_side);
    md.position.z = terrain.height_at(md.position.x, md.position.y);
    md.arrival_rate = c.arrival_rate;
    md.p_min = c.p_md_min;
    md.p_max = c.p_md_max;
    md.f_min = c.f_md_min;
    md.f_max = c.f_md_max;
    out.push_back(md);
  }
  return out;
}

/// Poisson(λL) arrivals per slot with exponential sizes.
inline std::vector<TaskInstance> generate_tasks(const MobileDevice& md, const Timeline& timeline,
                                                Rng& rng, double mean_size,
                                                double cycles_per_bit) {
  if (!(md.arrival_rate > 0.0)) throw DomainError("arrival rate must be positive");
  if (!(mean_size > 0.0)) throw DomainError("mean task size must be positive");
  std::vector<TaskInstance> out;
  const double mean_count = md.arrival_rate * timeline.slot_len;
  int k = 0;
  for (int t = 0; t < timeline.slots; ++t) {
    const auto n = rng.poisson(mean_count);
    for (std::uint64_t i = 0; i < n; ++i)
      out.push_back({md.index, k++, rng.exponential(mean_size), cycles_per_bit, t});
  }
  return out;
}

/// Task streams for all devices over the timeline, one child stream each.
inline std::vector<TaskInstance> generate_all_tasks(const ScenarioConfig& c,
                                                    const std::vector<MobileDevice>& mds,
                                                    const Timeline& timeline, const Rng& rng) {
  std::vector<TaskInstance> out;
  const Rng base = rng.child(stream::tasks);
  for (const auto& md : mds) {
    Rng r = base.child(md.index);
    auto t = generate_tasks(md, timeline, r, c.task_size_mean, c.cycles_per_bit);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

}  // namespace uavfog
