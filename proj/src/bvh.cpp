#include "lidarsynth/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lidarsynth {

namespace {

constexpr std::uint32_t kLeafSize = 4;

struct BuildItem {
  Vec3 centroid;
  std::uint32_t input_index;
};

Aabb triangle_bounds(const Triangle& tri) {
  Aabb box;
  box.expand(tri.v0);
  box.expand(tri.v1);
  box.expand(tri.v2);
  return box;
}

// Slab test returning the entry distance, or nullopt when the ray misses the
// box or enters only beyond t_limit. Zero direction components are handled
// explicitly so the test never produces NaNs.
std::optional<double> box_entry(const Ray& ray, const Aabb& box, double t_limit) {
  double t_near = 0.0;
  double t_far = t_limit;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    const double lo = axis == 0 ? box.lo.x : (axis == 1 ? box.lo.y : box.lo.z);
    const double hi = axis == 0 ? box.hi.x : (axis == 1 ? box.hi.y : box.hi.z);
    if (d == 0.0) {
      if (o < lo || o > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - o) / d;
    double t1 = (hi - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  return t_near;
}

}  // namespace

Bvh build_bvh(std::vector<Triangle> triangles) {
  Bvh bvh;
  const std::size_t n = triangles.size();
  if (n == 0) return bvh;

  std::vector<BuildItem> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Triangle& tri = triangles[i];
    items[i].centroid = (tri.v0 + tri.v1 + tri.v2) / 3.0;
    items[i].input_index = static_cast<std::uint32_t>(i);
  }

  bvh.triangles_.reserve(n);
  bvh.input_index_.reserve(n);
  bvh.nodes_.reserve(2 * n);

  struct Range {
    std::uint32_t begin, end;
    std::int32_t parent;   // node index whose child slot to fill, -1 for root
    bool left_child;
  };

  std::vector<Range> stack;
  stack.push_back({0, static_cast<std::uint32_t>(n), -1, false});

  while (!stack.empty()) {
    const Range range = stack.back();
    stack.pop_back();
    const std::uint32_t count = range.end - range.begin;

    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t i = range.begin; i < range.end; ++i) {
      box.expand(triangle_bounds(triangles[items[i].input_index]));
      centroid_box.expand(items[i].centroid);
    }

    const std::int32_t node_index = static_cast<std::int32_t>(bvh.nodes_.size());
    bvh.nodes_.push_back({});
    bvh.nodes_[node_index].box = box;
    if (range.parent >= 0) {
      if (range.left_child) {
        bvh.nodes_[range.parent].left = node_index;
      } else {
        bvh.nodes_[range.parent].right = node_index;
      }
    }

    const Vec3 extent = centroid_box.hi - centroid_box.lo;
    const bool splittable = count > kLeafSize && (extent.x > 0 || extent.y > 0 || extent.z > 0);
    if (!splittable) {
      Bvh::Node& node = bvh.nodes_[node_index];
      node.first = static_cast<std::uint32_t>(bvh.triangles_.size());
      node.count = count;
      for (std::uint32_t i = range.begin; i < range.end; ++i) {
        bvh.triangles_.push_back(triangles[items[i].input_index]);
        bvh.input_index_.push_back(items[i].input_index);
      }
      continue;
    }

    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    const std::uint32_t mid = range.begin + count / 2;
    std::nth_element(items.begin() + range.begin, items.begin() + mid, items.begin() + range.end,
                     [axis](const BuildItem& a, const BuildItem& b) {
                       if (a.centroid[axis] != b.centroid[axis]) {
                         return a.centroid[axis] < b.centroid[axis];
                       }
                       return a.input_index < b.input_index;
                     });

    stack.push_back({mid, range.end, node_index, false});
    stack.push_back({range.begin, mid, node_index, true});
  }

  return bvh;
}

std::optional<Hit> Bvh::nearest_hit(const Ray& ray, double t_max) const {
  if (nodes_.empty() || !(t_max > 0.0)) return std::nullopt;

  std::optional<Hit> best;
  double best_t = t_max;

  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;

  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!box_entry(ray, node.box, best_t)) continue;

    if (node.is_leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto result = ray_triangle(ray, triangles_[i]);
        if (!result || result->t > best_t) continue;
        const std::uint32_t obj = triangles_[i].object_ref;
        const std::uint32_t idx = input_index_[i];
        if (best && result->t == best->t) {
          if (obj > best->object_ref ||
              (obj == best->object_ref && idx >= best->triangle_index)) {
            continue;
          }
        }
        best = Hit{result->t, result->point, obj, idx};
        best_t = result->t;
      }
      continue;
    }

    // Near child last so it is traversed first.
    const auto left_entry = box_entry(ray, nodes_[node.left].box, best_t);
    const auto right_entry = box_entry(ray, nodes_[node.right].box, best_t);
    if (left_entry && right_entry) {
      if (*left_entry <= *right_entry) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    } else if (left_entry) {
      stack[top++] = node.left;
    } else if (right_entry) {
      stack[top++] = node.right;
    }
  }

  return best;
}

}  // namespace lidarsynth
