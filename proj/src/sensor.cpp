#include "lidarsynth/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lidarsynth/rng.hpp"

namespace lidarsynth {

void LidarConfig::validate() const {
  if (channels < 1) throw std::invalid_argument("lidar: channels must be >= 1");
  if (channels > 1 && !(vfov_min_deg < vfov_max_deg)) {
    throw std::invalid_argument("lidar: vfov_min must be below vfov_max");
  }
  if (channels == 1 && vfov_min_deg > vfov_max_deg) {
    throw std::invalid_argument("lidar: vfov_min must not exceed vfov_max");
  }
  if (rays_per_scan < channels) throw std::invalid_argument("lidar: rays_per_scan < channels");
  if (!(max_range > 0.0)) throw std::invalid_argument("lidar: max_range must be positive");
  if (range_noise_sigma < 0.0) throw std::invalid_argument("lidar: negative range noise");
  if (dropout_prob < 0.0 || dropout_prob > 1.0) {
    throw std::invalid_argument("lidar: dropout_prob outside [0,1]");
  }
  if (attenuation < 0.0) throw std::invalid_argument("lidar: negative attenuation");
  if (!(rotation_rate > 0.0)) throw std::invalid_argument("lidar: rotation_rate must be positive");
}

std::vector<RayDirection> scan_pattern(const LidarConfig& config) {
  config.validate();
  const int steps = config.azimuth_steps();
  const double azimuth_step = 360.0 / steps;

  std::vector<double> elevations(config.channels);
  if (config.channels == 1) {
    elevations[0] = 0.5 * (config.vfov_min_deg + config.vfov_max_deg);
  } else {
    const double de = (config.vfov_max_deg - config.vfov_min_deg) / (config.channels - 1);
    for (int c = 0; c < config.channels; ++c) {
      elevations[c] = config.vfov_min_deg + de * c;
    }
    elevations.back() = config.vfov_max_deg;  // exact endpoint
  }

  std::vector<RayDirection> pattern;
  pattern.reserve(static_cast<std::size_t>(steps) * config.channels);
  for (int j = 0; j < steps; ++j) {
    const double az = azimuth_step * j;
    for (int c = 0; c < config.channels; ++c) {
      pattern.push_back({elevations[c], az});
    }
  }
  return pattern;
}

double intensity(double distance, const LidarConfig& config) {
  return std::exp(-config.attenuation * distance);
}

Scan simulate_scan(const SceneSnapshot& snapshot, const Bvh& bvh, const LidarConfig& config,
                   const RigidTransform& ego_pose, std::uint64_t rng_seed) {
  const auto pattern = scan_pattern(config);
  const Vec3 origin = ego_pose.apply({0.0, 0.0, config.mount_height});
  const double max_norm = config.max_range + 3.0 * config.range_noise_sigma;

  Scan scan;
  scan.points.reserve(pattern.size() / 2);
  scan.labels.reserve(pattern.size() / 2);

  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const Vec3 dir_sensor = direction_from_angles(pattern[i].elevation_deg, pattern[i].azimuth_deg);
    const Ray ray{origin, ego_pose.rotate(dir_sensor)};
    const auto hit = bvh.nearest_hit(ray, config.max_range);
    if (!hit) continue;

    // Per-ray stream so tracing order never affects the output.
    Rng rng(mix_seed(rng_seed, static_cast<std::uint64_t>(i)));
    if (config.dropout_prob > 0.0 && rng.next_double() < config.dropout_prob) continue;

    double range = hit->t;
    if (config.range_noise_sigma > 0.0) {
      const double noise = rng.normal(0.0, config.range_noise_sigma);
      const double cap = 3.0 * config.range_noise_sigma;
      range += std::clamp(noise, -cap, cap);
      if (range <= 0.0) continue;
    }

    ScanPoint point;
    point.x = static_cast<float>(range * dir_sensor.x);
    point.y = static_cast<float>(range * dir_sensor.y);
    point.z = static_cast<float>(range * dir_sensor.z);
    point.intensity = static_cast<float>(intensity(range, config));

    // The stored floats must satisfy the range bound too; float rounding can
    // push a point at the boundary just past it.
    const double fx = point.x, fy = point.y, fz = point.z;
    if (std::sqrt(fx * fx + fy * fy + fz * fz) > max_norm) continue;

    if (hit->object_ref >= snapshot.object_labels.size()) {
      throw std::out_of_range("simulate_scan: hit object_ref " + std::to_string(hit->object_ref) +
                              " has no label entry");
    }
    scan.points.push_back(point);
    scan.labels.push_back(snapshot.object_labels[hit->object_ref]);
  }
  return scan;
}

}  // namespace lidarsynth
