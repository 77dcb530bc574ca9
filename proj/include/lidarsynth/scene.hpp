#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lidarsynth/geometry.hpp"
#include "lidarsynth/sensor.hpp"
#include "lidarsynth/taxonomy.hpp"

namespace lidarsynth {

struct SceneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Procedural grid-city template. Distances in meters; densities in [0,1].
struct MapTemplate {
  std::string name = "custom";
  int grid_cols = 4;
  int grid_rows = 4;
  double block_size = 38.0;
  double road_width = 9.0;
  double sidewalk_width = 3.0;

  double building_fraction = 0.9;
  double building_min_height = 12.0;
  double building_max_height = 30.0;
  double building_setback = 1.5;

  double tree_spacing = 14.0;      // street trees along sidewalks; 0 disables
  double pole_spacing = 24.0;      // street poles; 0 disables
  double sign_fraction = 0.5;      // poles carrying a sign plate
  double fence_fraction = 0.35;    // open lots with a fence
  double terrain_fraction = 0.6;   // open lots left as grass (vs paved)
  double guardrail_fraction = 0.25;  // outer road edges with a guardrail

  int perimeter_tree_rows = 3;
  int mesh_detail = 1;  // tessellation multiplier for denser meshes

  double lane_offset() const { return road_width / 4.0; }

  void validate() const;

  // Upper bound on actors of one class this template can host, derived from
  // the support (lanes, sidewalks, route loop) the class spawns on. Zero for
  // classes the generator does not know how to place.
  int actor_capacity(const std::string& class_name) const;

  // key = value lines, '#' comments; unknown keys rejected.
  static MapTemplate parse(std::string_view text);
  std::string serialize() const;
};

// Seven shipped presets; `demo_urban` aliases the dense one used by the
// bundled demos.
const std::vector<MapTemplate>& shipped_templates();
const MapTemplate& find_template(const std::string& name);

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Closed rectangular loop walked counterclockwise, heading tangent.
class Route {
 public:
  Route() = default;
  static Route rectangle(const Rect& rect);

  bool valid() const { return length_ > 0.0; }
  double length() const { return length_; }

  // Pose at arc length s (wraps). reverse walks the loop clockwise.
  RigidTransform pose_at(double s, bool reverse = false) const;

 private:
  std::array<Vec3, 4> corners_{};
  std::array<double, 4> segment_length_{};
  double length_ = 0.0;
};

enum class MotionKind { kNone, kLoop, kPingPong };

struct Motion {
  MotionKind kind = MotionKind::kNone;
  double speed = 0.0;  // m/s along the support path
  double s0 = 0.0;     // initial arc length / segment offset
  Vec3 p0, p1;         // ping-pong segment endpoints
};

struct SceneObject {
  std::vector<Triangle> mesh;  // object frame
  std::uint16_t raw_class = 0;
  std::uint16_t instance_id = 0;  // 0 for static world
  RigidTransform transform;       // object -> world at time 0
  Motion motion;
};

// Immutable once built; share freely across scan workers.
class Scene {
 public:
  std::vector<SceneObject> objects;
  const Taxonomy* taxonomy = nullptr;
  Aabb bounds;

  Route route;          // ego lane loop
  Route oncoming_loop;  // opposite lane, used by moving actors
  std::vector<Rect> lane_rects;  // road strips, for placement and tests

  bool has_motion() const;

  // World-space triangle soup at `time` seconds after the first scan, with
  // one label entry per object.
  SceneSnapshot snapshot(double time) const;

  std::size_t triangle_count() const;
};

// Per-class actor counts; keys are taxonomy raw ids.
struct SpawnPlan {
  std::map<std::uint16_t, int> counts;

  int total() const;
};

// Builds the static world from the template and places exactly plan[c]
// actors of each class on valid supports (vehicles on lanes, pedestrians on
// sidewalks), min spacing 1.5 m, never on the ego spawn. Deterministic for a
// given (template, plan, seed). Throws SceneError naming the class when a
// count exceeds template capacity.
Scene generate_scene(const MapTemplate& map, const SpawnPlan& plan, const Taxonomy& taxonomy,
                     std::uint64_t seed);

// n_scans poses along the lane loop, speed/rate meters apart, heading
// tangent to the path. Throws SceneError when the scene has no lane loop.
// The seed is reserved for pose jitter and currently unused.
std::vector<RigidTransform> ego_trajectory(const Scene& scene, int n_scans, double speed_mps,
                                           double rate_hz, std::uint64_t seed);

// Appends the ego-vehicle mesh at the given pose so its surfaces can return
// points. raw_class 0 emits ignore-mapped labels.
void append_ego(SceneSnapshot& snapshot, const RigidTransform& ego_pose, std::uint16_t raw_class,
                std::uint16_t instance_id);

// A deliberately heavy static scene for throughput measurements.
Scene benchmark_scene(std::size_t min_triangles, const Taxonomy& taxonomy, std::uint64_t seed);

}  // namespace lidarsynth
