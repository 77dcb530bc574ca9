#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace lidarsynth {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec3{};
}

// Rotation stored row-major; composes as this * other (apply other first).
struct RigidTransform {
  std::array<double, 9> r = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t;

  static RigidTransform identity() { return {}; }

  static RigidTransform translation(const Vec3& t) {
    RigidTransform tf;
    tf.t = t;
    return tf;
  }

  static RigidTransform yaw(double radians) {
    RigidTransform tf;
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    tf.r = {c, -s, 0, s, c, 0, 0, 0, 1};
    return tf;
  }

  Vec3 rotate(const Vec3& v) const {
    return {r[0] * v.x + r[1] * v.y + r[2] * v.z, r[3] * v.x + r[4] * v.y + r[5] * v.z,
            r[6] * v.x + r[7] * v.y + r[8] * v.z};
  }

  Vec3 apply(const Vec3& v) const { return rotate(v) + t; }

  RigidTransform compose(const RigidTransform& o) const {
    RigidTransform out;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out.r[3 * i + j] = r[3 * i] * o.r[j] + r[3 * i + 1] * o.r[3 + j] + r[3 * i + 2] * o.r[6 + j];
      }
    }
    out.t = rotate(o.t) + t;
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.r = {r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]};
    out.t = -out.rotate(t);
    return out;
  }
};

// Rotation orthonormality check, used by the pose writer to reject non-rigid input.
bool is_rigid(const RigidTransform& tf, double tolerance = 1e-6);

struct Triangle {
  Vec3 v0, v1, v2;
  std::uint32_t object_ref = 0;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  double t = 0.0;
  Vec3 point;
  std::uint32_t object_ref = 0;
  std::uint32_t triangle_index = 0;
};

// Hits at or below this distance are discarded so rays never return the
// surface they were emitted from.
inline constexpr double kHitEpsilon = 1e-4;

struct RayTriangleResult {
  double t;
  Vec3 point;
};

// Watertight-enough Moller-Trumbore; reports front and back faces, edges
// inclusive, never reports degenerate triangles.
std::optional<RayTriangleResult> ray_triangle(const Ray& ray, const Triangle& tri);

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }

  void expand(const Aabb& b) {
    expand(b.lo);
    expand(b.hi);
  }

  bool empty() const { return lo.x > hi.x; }
};

}  // namespace lidarsynth
