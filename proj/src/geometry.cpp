#include "lidarsynth/geometry.hpp"

#include <cmath>

namespace lidarsynth {

bool is_rigid(const RigidTransform& tf, double tolerance) {
  const auto& r = tf.r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double g = 0.0;
      for (int k = 0; k < 3; ++k) g += r[3 * k + i] * r[3 * k + j];
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(g - want) > tolerance) return false;
    }
  }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  if (std::abs(det - 1.0) > tolerance) return false;
  for (double v : {tf.t.x, tf.t.y, tf.t.z}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::optional<RayTriangleResult> ray_triangle(const Ray& ray, const Triangle& tri) {
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 pvec = cross(ray.direction, e2);
  const double det = dot(e1, pvec);
  if (det == 0.0) return std::nullopt;  // parallel or degenerate
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - tri.v0;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(ray.direction, qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot(e2, qvec) * inv_det;
  if (!(t > kHitEpsilon) || !std::isfinite(t)) return std::nullopt;
  return RayTriangleResult{t, ray.origin + ray.direction * t};
}

}  // namespace lidarsynth
