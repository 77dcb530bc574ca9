#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lidarsynth/bvh.hpp"
#include "lidarsynth/geometry.hpp"

namespace lidarsynth {

struct LidarConfig {
  int channels = 64;
  double vfov_min_deg = -3.0;
  double vfov_max_deg = 25.0;
  // Smallest multiple of the channel count at or above the 130k points/scan
  // the sensor is matched to (64 x 2032).
  int rays_per_scan = 130048;
  double max_range = 80.0;
  double range_noise_sigma = 0.0;
  double dropout_prob = 0.0;
  double attenuation = 0.004;   // 1/m
  double mount_height = 1.73;   // m above the ego origin
  double rotation_rate = 10.0;  // Hz

  int azimuth_steps() const { return (rays_per_scan + channels - 1) / channels; }

  // Throws std::invalid_argument on an out-of-range field.
  void validate() const;
};

struct ScanPoint {
  float x = 0, y = 0, z = 0;
  float intensity = 0;
};

struct PointLabel {
  std::uint16_t semantic = 0;
  std::uint16_t instance = 0;

  bool operator==(const PointLabel&) const = default;
};

struct Scan {
  std::vector<ScanPoint> points;   // sensor frame
  std::vector<PointLabel> labels;  // same length
};

struct RayDirection {
  double elevation_deg = 0;
  double azimuth_deg = 0;
};

// One revolution's ray grid: azimuth-major, channels bottom-up within each
// azimuth step. Elevations span [vfov_min, vfov_max] inclusive (midpoint for
// a single channel), azimuths span [0, 360) starting at 0.
std::vector<RayDirection> scan_pattern(const LidarConfig& config);

inline Vec3 direction_from_angles(double elevation_deg, double azimuth_deg) {
  const double e = elevation_deg * M_PI / 180.0;
  const double a = azimuth_deg * M_PI / 180.0;
  const double ce = std::cos(e);
  return {ce * std::cos(a), ce * std::sin(a), std::sin(e)};
}

// World-space view of a scene at one instant: triangle soup plus the
// (semantic, instance) label of each object_ref.
struct SceneSnapshot {
  std::vector<Triangle> triangles;
  std::vector<PointLabel> object_labels;  // indexed by object_ref
};

// exp(-attenuation * distance); in (0, 1] for distance >= 0.
double intensity(double distance, const LidarConfig& config);

// Traces one revolution from the sensor mount (ego pose raised by
// mount_height). Pure function of its arguments: identical inputs produce a
// byte-identical Scan. Points are emitted in pattern order, in the sensor
// frame, labeled with the hit object's (semantic, instance).
Scan simulate_scan(const SceneSnapshot& snapshot, const Bvh& bvh, const LidarConfig& config,
                   const RigidTransform& ego_pose, std::uint64_t rng_seed);

}  // namespace lidarsynth
