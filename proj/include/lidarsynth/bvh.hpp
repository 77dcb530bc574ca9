#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lidarsynth/geometry.hpp"

namespace lidarsynth {

// Binary BVH over a triangle soup. Median split on the longest axis of the
// centroid bounds, leaves hold up to four triangles. Immutable after build;
// concurrent queries are safe.
class Bvh {
 public:
  struct Node {
    Aabb box;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t first = 0;  // index into ordered triangle array (leaves only)
    std::uint32_t count = 0;  // 0 for interior nodes

    bool is_leaf() const { return count > 0; }
  };

  bool empty() const { return triangles_.empty(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Nearest intersection with t in (kHitEpsilon, t_max]. Equal-t ties go to
  // the lowest object_ref, then the lowest input triangle index.
  std::optional<Hit> nearest_hit(const Ray& ray, double t_max) const;

  friend Bvh build_bvh(std::vector<Triangle> triangles);

 private:
  std::vector<Node> nodes_;
  std::vector<Triangle> triangles_;       // leaf order
  std::vector<std::uint32_t> input_index_;  // per stored triangle, index in build input
};

Bvh build_bvh(std::vector<Triangle> triangles);

inline std::optional<Hit> nearest_hit(const Bvh& bvh, const Ray& ray, double t_max) {
  return bvh.nearest_hit(ray, t_max);
}

}  // namespace lidarsynth
