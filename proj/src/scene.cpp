#include "lidarsynth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lidarsynth/rng.hpp"

namespace lidarsynth {

namespace {

constexpr double kCurbHeight = 0.12;
constexpr double kActorSpacing = 1.5;
constexpr double kEgoClearRadius = 6.0;
constexpr int kPlacementAttempts = 400;

double wrap(double s, double length) {
  double r = std::fmod(s, length);
  return r < 0.0 ? r + length : r;
}

// --- mesh builders (object frame, +x forward where it matters) ---

void add_quad_up(std::vector<Triangle>& mesh, const Rect& r, double z, int detail) {
  const int n = std::max(1, detail);
  const double dx = r.width() / n;
  const double dy = r.height() / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x0 = r.x0 + dx * i, x1 = x0 + dx;
      const double y0 = r.y0 + dy * j, y1 = y0 + dy;
      mesh.push_back({{x0, y0, z}, {x1, y0, z}, {x1, y1, z}});
      mesh.push_back({{x0, y0, z}, {x1, y1, z}, {x0, y1, z}});
    }
  }
}

void add_face(std::vector<Triangle>& mesh, const Vec3& origin, const Vec3& u, const Vec3& v,
              int detail) {
  const int n = std::max(1, detail);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec3 a = origin + u * (double(i) / n) + v * (double(j) / n);
      const Vec3 b = origin + u * (double(i + 1) / n) + v * (double(j) / n);
      const Vec3 c = origin + u * (double(i + 1) / n) + v * (double(j + 1) / n);
      const Vec3 d = origin + u * (double(i) / n) + v * (double(j + 1) / n);
      mesh.push_back({a, b, c});
      mesh.push_back({a, c, d});
    }
  }
}

void add_box(std::vector<Triangle>& mesh, const Vec3& lo, const Vec3& hi, int detail = 1) {
  const Vec3 dx{hi.x - lo.x, 0, 0};
  const Vec3 dy{0, hi.y - lo.y, 0};
  const Vec3 dz{0, 0, hi.z - lo.z};
  add_face(mesh, lo, dx, dy, detail);                        // bottom
  add_face(mesh, {lo.x, lo.y, hi.z}, dx, dy, detail);        // top
  add_face(mesh, lo, dy, dz, detail);                        // west
  add_face(mesh, {hi.x, lo.y, lo.z}, dy, dz, detail);        // east
  add_face(mesh, lo, dx, dz, detail);                        // south
  add_face(mesh, {lo.x, hi.y, lo.z}, dx, dz, detail);        // north
}

void add_prism(std::vector<Triangle>& mesh, const Vec3& center, double radius, double z0, double z1,
               int sides) {
  for (int i = 0; i < sides; ++i) {
    const double a0 = 2.0 * M_PI * i / sides;
    const double a1 = 2.0 * M_PI * (i + 1) / sides;
    const Vec3 p0{center.x + radius * std::cos(a0), center.y + radius * std::sin(a0), z0};
    const Vec3 p1{center.x + radius * std::cos(a1), center.y + radius * std::sin(a1), z0};
    const Vec3 q0{p0.x, p0.y, z1};
    const Vec3 q1{p1.x, p1.y, z1};
    mesh.push_back({p0, p1, q1});
    mesh.push_back({p0, q1, q0});
    mesh.push_back({{center.x, center.y, z1}, q0, q1});  // top cap fan
  }
}

// Double cone: ring at mid height, apexes above and below.
void add_canopy(std::vector<Triangle>& mesh, const Vec3& center, double radius, double z_lo,
                double z_hi, int sides) {
  const double z_mid = 0.5 * (z_lo + z_hi);
  const Vec3 top{center.x, center.y, z_hi};
  const Vec3 bottom{center.x, center.y, z_lo};
  for (int i = 0; i < sides; ++i) {
    const double a0 = 2.0 * M_PI * i / sides;
    const double a1 = 2.0 * M_PI * (i + 1) / sides;
    const Vec3 p0{center.x + radius * std::cos(a0), center.y + radius * std::sin(a0), z_mid};
    const Vec3 p1{center.x + radius * std::cos(a1), center.y + radius * std::sin(a1), z_mid};
    mesh.push_back({p0, p1, top});
    mesh.push_back({p1, p0, bottom});
  }
}

void add_tree(std::vector<Triangle>& mesh, const Vec3& base, double canopy_radius,
              double canopy_top, int detail) {
  const int sides = 6 * std::max(1, detail);
  const double canopy_lo = std::max(1.6, canopy_top * 0.32);
  add_prism(mesh, base, 0.16, base.z, canopy_lo + 0.4, sides);
  add_canopy(mesh, base, canopy_radius, canopy_lo, canopy_top, sides);
}

std::vector<Triangle> car_mesh() {
  std::vector<Triangle> mesh;
  add_box(mesh, {-2.2, -0.92, 0.28}, {2.2, 0.92, 0.85});
  add_box(mesh, {-1.5, -0.82, 0.85}, {0.9, 0.82, 1.48});
  return mesh;
}

std::vector<Triangle> truck_mesh() {
  std::vector<Triangle> mesh;
  add_box(mesh, {1.7, -1.22, 0.45}, {3.8, 1.22, 2.9});    // cab
  add_box(mesh, {-3.8, -1.25, 0.55}, {1.6, 1.25, 3.25});  // cargo box
  return mesh;
}

std::vector<Triangle> motorcycle_mesh() {
  std::vector<Triangle> mesh;
  add_box(mesh, {-1.0, -0.2, 0.3}, {1.0, 0.2, 0.95});
  add_box(mesh, {0.55, -0.3, 0.95}, {0.85, 0.3, 1.15});  // handlebar
  return mesh;
}

std::vector<Triangle> bicycle_mesh() {
  std::vector<Triangle> mesh;
  add_box(mesh, {-0.88, -0.06, 0.3}, {0.88, 0.06, 1.0});
  add_box(mesh, {0.5, -0.22, 1.0}, {0.7, 0.22, 1.1});  // handlebar
  return mesh;
}

void add_person(std::vector<Triangle>& mesh, const Vec3& base, double height) {
  add_prism(mesh, base, 0.24, base.z, base.z + height * 0.82, 8);
  add_prism(mesh, {base.x, base.y, 0.0}, 0.13, base.z + height * 0.82, base.z + height, 8);
}

std::vector<Triangle> person_mesh() {
  std::vector<Triangle> mesh;
  add_person(mesh, {0, 0, 0}, 1.72);
  return mesh;
}

std::vector<Triangle> bicyclist_mesh() {
  std::vector<Triangle> mesh = bicycle_mesh();
  add_person(mesh, {-0.15, 0, 0.55}, 1.25);  // crouched rider
  return mesh;
}

std::vector<Triangle> motorcyclist_mesh() {
  std::vector<Triangle> mesh = motorcycle_mesh();
  add_person(mesh, {-0.2, 0, 0.6}, 1.2);
  return mesh;
}

std::vector<Triangle> ego_mesh() {
  std::vector<Triangle> mesh;
  add_box(mesh, {-2.3, -0.95, 0.35}, {2.3, 0.95, 1.0});   // body / hood level
  add_box(mesh, {-1.4, -0.85, 1.0}, {0.8, 0.85, 1.62});   // cabin below the mount
  return mesh;
}

std::string base_class_name(const std::string& name) {
  constexpr std::string_view prefix = "moving-";
  if (name.rfind(prefix, 0) == 0) return name.substr(prefix.size());
  return name;
}

struct Layout {
  double width = 0, height = 0, pitch = 0;
  std::vector<double> road_x;  // vertical road centerlines
  std::vector<double> road_y;  // horizontal road centerlines
  int ring_il = 0, ring_ih = 0, ring_jl = 0, ring_jh = 0;

  explicit Layout(const MapTemplate& map) {
    pitch = map.block_size + map.road_width;
    width = map.grid_cols * pitch + map.road_width;
    height = map.grid_rows * pitch + map.road_width;
    for (int i = 0; i <= map.grid_cols; ++i) {
      road_x.push_back(-width / 2 + map.road_width / 2 + i * pitch);
    }
    for (int j = 0; j <= map.grid_rows; ++j) {
      road_y.push_back(-height / 2 + map.road_width / 2 + j * pitch);
    }
    ring_il = map.grid_cols >= 3 ? 1 : 0;
    ring_ih = map.grid_cols >= 3 ? map.grid_cols - 1 : 1;
    ring_jl = map.grid_rows >= 3 ? 1 : 0;
    ring_jh = map.grid_rows >= 3 ? map.grid_rows - 1 : 1;
  }

  Rect block(int bi, int bj, const MapTemplate& map) const {
    const double x0 = road_x[bi] + map.road_width / 2;
    const double y0 = road_y[bj] + map.road_width / 2;
    return {x0, y0, x0 + map.block_size, y0 + map.block_size};
  }
};

class SceneBuilder {
 public:
  SceneBuilder(const MapTemplate& map, const Taxonomy& taxonomy, std::uint64_t seed)
      : map_(map), taxonomy_(taxonomy), layout_(map), rng_(mix_seed(seed, 0xc17f5ce11eULL)) {}

  Scene build(const SpawnPlan& plan);

 private:
  std::uint16_t raw_id(const std::string& name) const {
    const ClassDef* def = taxonomy_.find_name(name);
    if (!def) {
      throw SceneError("template '" + map_.name + "' needs class '" + name +
                       "' which the taxonomy does not define");
    }
    return def->raw_id;
  }

  void add_static(const std::string& class_name, std::vector<Triangle> mesh) {
    if (mesh.empty()) return;
    SceneObject obj;
    obj.mesh = std::move(mesh);
    obj.raw_class = raw_id(class_name);
    scene_.objects.push_back(std::move(obj));
  }

  void build_roads();
  void build_markings();
  void build_blocks();
  void build_street_furniture();
  void build_guardrails();
  void build_perimeter();
  void place_actors(const SpawnPlan& plan);
  bool place_one(const ClassDef& def, std::uint16_t instance);

  bool position_ok(const Vec3& p) const {
    const Vec3 ego = scene_.route.pose_at(0.0).t;
    const double dx = p.x - ego.x, dy = p.y - ego.y;
    if (dx * dx + dy * dy < kEgoClearRadius * kEgoClearRadius) return false;
    for (const Vec3& q : placed_) {
      const double ax = p.x - q.x, ay = p.y - q.y;
      if (ax * ax + ay * ay < kActorSpacing * kActorSpacing) return false;
    }
    return true;
  }

  const MapTemplate& map_;
  const Taxonomy& taxonomy_;
  Layout layout_;
  Rng rng_;
  Scene scene_;
  std::vector<Vec3> placed_;
  std::vector<Rect> sidewalk_rects_;
  std::vector<Rect> nonring_road_rects_;
};

void SceneBuilder::build_roads() {
  const double rw = map_.road_width;
  const int detail = map_.mesh_detail;

  for (int i = 0; i <= map_.grid_cols; ++i) {
    const double cx = layout_.road_x[i];
    const Rect strip{cx - rw / 2, -layout_.height / 2, cx + rw / 2, layout_.height / 2};
    std::vector<Triangle> mesh;
    add_quad_up(mesh, strip, 0.0, detail * 8);
    add_static("road", std::move(mesh));
    scene_.lane_rects.push_back(strip);
    const bool ring = i == layout_.ring_il || i == layout_.ring_ih;
    if (!ring) nonring_road_rects_.push_back(strip);
  }
  for (int j = 0; j <= map_.grid_rows; ++j) {
    const double cy = layout_.road_y[j];
    for (int bi = 0; bi < map_.grid_cols; ++bi) {
      const Rect seg{layout_.road_x[bi] + rw / 2, cy - rw / 2, layout_.road_x[bi + 1] - rw / 2,
                     cy + rw / 2};
      std::vector<Triangle> mesh;
      add_quad_up(mesh, seg, 0.0, detail * 4);
      add_static("road", std::move(mesh));
    }
    const Rect strip{-layout_.width / 2, cy - rw / 2, layout_.width / 2, cy + rw / 2};
    scene_.lane_rects.push_back(strip);
    const bool ring = j == layout_.ring_jl || j == layout_.ring_jh;
    if (!ring) nonring_road_rects_.push_back(strip);
  }
}

void SceneBuilder::build_markings() {
  const double rw = map_.road_width;
  const double dash = 3.0, gap = 9.0, half_w = 0.08;

  for (int i = 0; i <= map_.grid_cols; ++i) {
    const double cx = layout_.road_x[i];
    std::vector<Triangle> mesh;
    for (double y = -layout_.height / 2 + 2.0; y + dash < layout_.height / 2; y += dash + gap) {
      bool crosses = false;
      for (double cy : layout_.road_y) {
        if (y + dash > cy - rw / 2 && y < cy + rw / 2) crosses = true;
      }
      if (crosses) continue;
      add_quad_up(mesh, {cx - half_w, y, cx + half_w, y + dash}, 0.002, 1);
    }
    add_static("lane-marking", std::move(mesh));
  }
  for (int j = 0; j <= map_.grid_rows; ++j) {
    const double cy = layout_.road_y[j];
    std::vector<Triangle> mesh;
    for (double x = -layout_.width / 2 + 2.0; x + dash < layout_.width / 2; x += dash + gap) {
      bool crosses = false;
      for (double cx : layout_.road_x) {
        if (x + dash > cx - rw / 2 && x < cx + rw / 2) crosses = true;
      }
      if (crosses) continue;
      add_quad_up(mesh, {x, cy - half_w, x + dash, cy + half_w}, 0.002, 1);
    }
    add_static("lane-marking", std::move(mesh));
  }
}

void SceneBuilder::build_blocks() {
  const double sw = map_.sidewalk_width;
  const int detail = map_.mesh_detail;

  for (int bi = 0; bi < map_.grid_cols; ++bi) {
    for (int bj = 0; bj < map_.grid_rows; ++bj) {
      const Rect b = layout_.block(bi, bj, map_);

      // Sidewalk ring: four curb-height slabs.
      const Rect south{b.x0, b.y0, b.x1, b.y0 + sw};
      const Rect north{b.x0, b.y1 - sw, b.x1, b.y1};
      const Rect west{b.x0, b.y0 + sw, b.x0 + sw, b.y1 - sw};
      const Rect east{b.x1 - sw, b.y0 + sw, b.x1, b.y1 - sw};
      std::vector<Triangle> walk;
      for (const Rect& r : {south, north, west, east}) {
        add_box(walk, {r.x0, r.y0, 0.0}, {r.x1, r.y1, kCurbHeight}, detail * 2);
        sidewalk_rects_.push_back(r);
      }
      add_static("sidewalk", std::move(walk));

      // Interior split into 2x2 lots.
      const Rect inner{b.x0 + sw, b.y0 + sw, b.x1 - sw, b.y1 - sw};
      const double lw = inner.width() / 2, lh = inner.height() / 2;
      for (int li = 0; li < 2; ++li) {
        for (int lj = 0; lj < 2; ++lj) {
          const Rect lot{inner.x0 + li * lw, inner.y0 + lj * lh, inner.x0 + (li + 1) * lw,
                         inner.y0 + (lj + 1) * lh};
          std::vector<Triangle> ground;
          add_quad_up(ground, lot, 0.02, detail * 3);
          add_static("terrain", std::move(ground));

          if (rng_.next_double() < map_.building_fraction) {
            const double s = map_.building_setback;
            const double h = rng_.uniform(map_.building_min_height, map_.building_max_height);
            std::vector<Triangle> bldg;
            add_box(bldg, {lot.x0 + s, lot.y0 + s, 0.0}, {lot.x1 - s, lot.y1 - s, h}, detail * 2);
            add_static("building", std::move(bldg));
          } else {
            if (rng_.next_double() < map_.fence_fraction) {
              std::vector<Triangle> fence;
              const int open_side = static_cast<int>(rng_.next_below(4));
              const double fh = rng_.uniform(1.2, 1.8);
              const Rect sides[4] = {{lot.x0, lot.y0, lot.x1, lot.y0 + 0.08},
                                     {lot.x0, lot.y1 - 0.08, lot.x1, lot.y1},
                                     {lot.x0, lot.y0, lot.x0 + 0.08, lot.y1},
                                     {lot.x1 - 0.08, lot.y0, lot.x1, lot.y1}};
              for (int side = 0; side < 4; ++side) {
                if (side == open_side) continue;
                add_box(fence, {sides[side].x0, sides[side].y0, 0.0},
                        {sides[side].x1, sides[side].y1, fh}, detail);
              }
              add_static("fence", std::move(fence));
            }
            if (rng_.next_double() < map_.terrain_fraction) {
              std::vector<Triangle> green;
              const int trees = 3 + static_cast<int>(rng_.next_below(4));
              for (int t = 0; t < trees; ++t) {
                const Vec3 base{rng_.uniform(lot.x0 + 2, lot.x1 - 2),
                                rng_.uniform(lot.y0 + 2, lot.y1 - 2), 0.02};
                add_tree(green, base, rng_.uniform(1.4, 2.6), rng_.uniform(4.5, 7.5),
                         map_.mesh_detail);
              }
              for (int s = 0; s < 3; ++s) {
                const double bx = rng_.uniform(lot.x0 + 1, lot.x1 - 2);
                const double by = rng_.uniform(lot.y0 + 1, lot.y1 - 2);
                add_box(green, {bx, by, 0.0}, {bx + rng_.uniform(0.6, 1.4),
                                               by + rng_.uniform(0.6, 1.4),
                                               rng_.uniform(0.5, 1.1)});
              }
              add_static("vegetation", std::move(green));
            }
          }
        }
      }

      // Street trees along the sidewalk ring.
      if (map_.tree_spacing > 0) {
        std::vector<Triangle> street_trees;
        const double inset = 0.9;
        auto tree_at = [&](double x, double y) {
          add_tree(street_trees, {x, y, kCurbHeight}, rng_.uniform(1.5, 2.3),
                   rng_.uniform(4.8, 6.8), map_.mesh_detail);
        };
        for (double x = b.x0 + 3; x < b.x1 - 3; x += map_.tree_spacing) {
          tree_at(x, b.y0 + inset);
          tree_at(x + map_.tree_spacing * 0.5, b.y1 - inset);
        }
        for (double y = b.y0 + 3; y < b.y1 - 3; y += map_.tree_spacing) {
          tree_at(b.x0 + inset, y + map_.tree_spacing * 0.25);
          tree_at(b.x1 - inset, y + map_.tree_spacing * 0.75);
        }
        add_static("vegetation", std::move(street_trees));
      }
    }
  }
}

void SceneBuilder::build_street_furniture() {
  if (map_.pole_spacing <= 0) return;
  const int detail = map_.mesh_detail;

  for (int bi = 0; bi < map_.grid_cols; ++bi) {
    for (int bj = 0; bj < map_.grid_rows; ++bj) {
      const Rect b = layout_.block(bi, bj, map_);
      const double inset = 0.45;
      int corner = (bi + bj) % 4;
      for (double x = b.x0 + 5; x < b.x1 - 3; x += map_.pole_spacing) {
        const double y = (corner++ % 2 == 0) ? b.y0 + inset : b.y1 - inset;
        std::vector<Triangle> pole;
        add_prism(pole, {x, y, kCurbHeight}, 0.07, kCurbHeight, 5.4, 4 + 2 * detail);
        add_static("pole", std::move(pole));
        if (rng_.next_double() < map_.sign_fraction) {
          std::vector<Triangle> sign;
          add_box(sign, {x - 0.33, y - 0.095, 1.9}, {x + 0.33, y - 0.035, 2.56}, detail);
          add_static("traffic-sign", std::move(sign));
        }
      }
    }
  }

  // Signal heads at the ring-route intersections.
  const double rw = map_.road_width;
  for (int i : {layout_.ring_il, layout_.ring_ih}) {
    for (int j : {layout_.ring_jl, layout_.ring_jh}) {
      const double cx = layout_.road_x[i] + rw / 2 + 0.4;
      const double cy = layout_.road_y[j] + rw / 2 + 0.4;
      std::vector<Triangle> light;
      add_prism(light, {cx, cy, 0.0}, 0.09, 0.0, 4.6, 4 + 2 * detail);
      add_box(light, {cx - 0.18, cy - 0.18, 3.6}, {cx + 0.18, cy + 0.18, 4.5});
      add_static("traffic-light", std::move(light));
    }
  }
}

void SceneBuilder::build_guardrails() {
  if (map_.guardrail_fraction <= 0) return;
  const double edge_x = layout_.width / 2 - 0.25;
  const double edge_y = layout_.height / 2 - 0.25;

  auto rail_segment = [&](const Vec3& a, const Vec3& b) {
    std::vector<Triangle> rail;
    for (double z : {0.45, 0.72}) {
      add_box(rail, {std::min(a.x, b.x) - 0.045, std::min(a.y, b.y) - 0.045, z},
              {std::max(a.x, b.x) + 0.045, std::max(a.y, b.y) + 0.045, z + 0.18});
    }
    const Vec3 d = b - a;
    const double len = norm(d);
    const Vec3 dir = d / len;
    for (double s = 0.0; s <= len; s += 2.5) {
      const Vec3 p = a + dir * s;
      add_box(rail, {p.x - 0.06, p.y - 0.06, 0.0}, {p.x + 0.06, p.y + 0.06, 0.62});
    }
    add_static("guardrail", std::move(rail));
  };

  for (int bi = 0; bi < map_.grid_cols; ++bi) {
    const double x0 = layout_.road_x[bi] + 1.5, x1 = layout_.road_x[bi + 1] - 1.5;
    if (rng_.next_double() < map_.guardrail_fraction) {
      rail_segment({x0, -edge_y, 0}, {x1, -edge_y, 0});
    }
    if (rng_.next_double() < map_.guardrail_fraction) {
      rail_segment({x0, edge_y, 0}, {x1, edge_y, 0});
    }
  }
  for (int bj = 0; bj < map_.grid_rows; ++bj) {
    const double y0 = layout_.road_y[bj] + 1.5, y1 = layout_.road_y[bj + 1] - 1.5;
    if (rng_.next_double() < map_.guardrail_fraction) {
      rail_segment({-edge_x, y0, 0}, {-edge_x, y1, 0});
    }
    if (rng_.next_double() < map_.guardrail_fraction) {
      rail_segment({edge_x, y0, 0}, {edge_x, y1, 0});
    }
  }
}

void SceneBuilder::build_perimeter() {
  const double apron = 28.0;
  const double hw = layout_.width / 2, hh = layout_.height / 2;
  const int detail = map_.mesh_detail;

  std::vector<Triangle> ground;
  add_quad_up(ground, {-hw - apron, -hh - apron, hw + apron, -hh}, 0.015, detail * 6);
  add_quad_up(ground, {-hw - apron, hh, hw + apron, hh + apron}, 0.015, detail * 6);
  add_quad_up(ground, {-hw - apron, -hh, -hw, hh}, 0.015, detail * 6);
  add_quad_up(ground, {hw, -hh, hw + apron, hh}, 0.015, detail * 6);
  add_static("terrain", std::move(ground));

  for (int row = 0; row < map_.perimeter_tree_rows; ++row) {
    const double offset = 5.0 + 3.6 * row;
    const double stagger = row % 2 == 0 ? 0.0 : 2.2;
    std::vector<Triangle> wall;
    auto big_tree = [&](double x, double y) {
      add_tree(wall, {x, y, 0.015}, rng_.uniform(2.9, 3.9), rng_.uniform(8.0, 11.5),
               map_.mesh_detail);
    };
    for (double x = -hw - apron + 4 + stagger; x < hw + apron - 2; x += 4.4) {
      big_tree(x, -hh - offset);
      big_tree(x, hh + offset);
    }
    for (double y = -hh + 2 + stagger; y < hh - 2; y += 4.4) {
      big_tree(-hw - offset, y);
      big_tree(hw + offset, y);
    }
    add_static("vegetation", std::move(wall));
  }
}

bool SceneBuilder::place_one(const ClassDef& def, std::uint16_t instance) {
  const std::string base = base_class_name(def.name);
  const bool moving = def.name != base;

  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    SceneObject obj;
    obj.raw_class = def.raw_id;
    obj.instance_id = instance;

    if (base == "car" || base == "truck" || base == "motorcycle") {
      if (moving) {
        const double s = rng_.uniform(0.0, scene_.oncoming_loop.length());
        const RigidTransform pose = scene_.oncoming_loop.pose_at(s, /*reverse=*/true);
        if (!position_ok(pose.t)) continue;
        obj.transform = pose;
        obj.motion = {MotionKind::kLoop,
                      base == "truck" ? rng_.uniform(4.5, 8.0)
                                      : (base == "car" ? rng_.uniform(5.0, 11.0)
                                                       : rng_.uniform(4.0, 9.0)),
                      s, {}, {}};
      } else {
        const auto& roads = nonring_road_rects_.empty()
                                ? scene_.lane_rects
                                : nonring_road_rects_;
        const Rect& road = roads[rng_.next_below(roads.size())];
        const bool vertical = road.height() > road.width();
        const double margin = 4.0;
        const double curb = (vertical ? road.width() : road.height()) / 2 - 1.25;
        const int side = rng_.next_below(2) == 0 ? 1 : -1;
        Vec3 pos;
        double yaw;
        if (vertical) {
          pos = {0.5 * (road.x0 + road.x1) + side * curb,
                 rng_.uniform(road.y0 + margin, road.y1 - margin), 0.0};
          yaw = side > 0 ? M_PI / 2 : -M_PI / 2;
        } else {
          pos = {rng_.uniform(road.x0 + margin, road.x1 - margin),
                 0.5 * (road.y0 + road.y1) + side * curb, 0.0};
          yaw = side > 0 ? M_PI : 0.0;
        }
        if (!position_ok(pos)) continue;
        obj.transform = RigidTransform::yaw(yaw);
        obj.transform.t = pos;
      }
    } else if (base == "bicyclist" || base == "motorcyclist") {
      const double s = rng_.uniform(0.0, scene_.oncoming_loop.length());
      const RigidTransform pose = scene_.oncoming_loop.pose_at(s, /*reverse=*/true);
      if (!position_ok(pose.t)) continue;
      obj.transform = pose;
      if (moving) {
        obj.motion = {MotionKind::kLoop,
                      base == "bicyclist" ? rng_.uniform(2.5, 5.5) : rng_.uniform(4.5, 9.0), s,
                      {}, {}};
      }
    } else if (base == "person" || base == "bicycle") {
      const Rect& walk = sidewalk_rects_[rng_.next_below(sidewalk_rects_.size())];
      const Vec3 pos{rng_.uniform(walk.x0 + 0.4, walk.x1 - 0.4),
                     rng_.uniform(walk.y0 + 0.4, walk.y1 - 0.4), kCurbHeight};
      if (!position_ok(pos)) continue;
      const bool along_x = walk.width() >= walk.height();
      const double yaw = along_x ? (rng_.next_below(2) ? 0.0 : M_PI)
                                 : (rng_.next_below(2) ? M_PI / 2 : -M_PI / 2);
      obj.transform = RigidTransform::yaw(yaw);
      obj.transform.t = pos;
      if (moving && base == "person") {
        const double reach = 6.0;
        const Vec3 dir = along_x ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        Vec3 p0 = pos - dir * reach;
        Vec3 p1 = pos + dir * reach;
        p0.x = std::clamp(p0.x, walk.x0 + 0.4, walk.x1 - 0.4);
        p0.y = std::clamp(p0.y, walk.y0 + 0.4, walk.y1 - 0.4);
        p1.x = std::clamp(p1.x, walk.x0 + 0.4, walk.x1 - 0.4);
        p1.y = std::clamp(p1.y, walk.y0 + 0.4, walk.y1 - 0.4);
        obj.motion = {MotionKind::kPingPong, rng_.uniform(0.8, 1.8),
                      rng_.uniform(0.0, 2.0 * norm(p1 - p0)), p0, p1};
      }
    } else {
      return false;  // placement rule unknown for this class
    }

    if (base == "car") obj.mesh = car_mesh();
    else if (base == "truck") obj.mesh = truck_mesh();
    else if (base == "motorcycle") obj.mesh = motorcycle_mesh();
    else if (base == "bicycle") obj.mesh = bicycle_mesh();
    else if (base == "person") obj.mesh = person_mesh();
    else if (base == "bicyclist") obj.mesh = bicyclist_mesh();
    else if (base == "motorcyclist") obj.mesh = motorcyclist_mesh();

    placed_.push_back(obj.transform.t);
    scene_.objects.push_back(std::move(obj));
    return true;
  }
  return false;
}

void SceneBuilder::place_actors(const SpawnPlan& plan) {
  for (const auto& [raw, count] : plan.counts) {
    if (count < 0) throw SceneError("negative spawn count for raw class " + std::to_string(raw));
    const ClassDef* def = taxonomy_.find_raw(raw);
    if (!def) throw SceneError("spawn plan names raw class " + std::to_string(raw) +
                               " which the taxonomy does not define");
    if (!def->adjustable) {
      throw SceneError("class '" + def->name + "' is not adjustable");
    }
    if (count > map_.actor_capacity(def->name)) {
      throw SceneError("capacity exceeded for class '" + def->name + "': requested " +
                       std::to_string(count) + ", template '" + map_.name + "' holds at most " +
                       std::to_string(map_.actor_capacity(def->name)));
    }
  }

  std::uint16_t next_instance = 1;
  for (const auto& [raw, count] : plan.counts) {
    const ClassDef* def = taxonomy_.find_raw(raw);
    for (int k = 0; k < count; ++k) {
      if (!place_one(*def, next_instance)) {
        throw SceneError("capacity exceeded for class '" + def->name + "': could not place actor " +
                         std::to_string(k + 1) + " of " + std::to_string(count));
      }
      ++next_instance;
    }
  }
}

Scene SceneBuilder::build(const SpawnPlan& plan) {
  scene_.taxonomy = &taxonomy_;

  const double lane = map_.lane_offset();
  const Rect ego_rect{layout_.road_x[layout_.ring_il] + lane,
                      layout_.road_y[layout_.ring_jl] + lane,
                      layout_.road_x[layout_.ring_ih] - lane,
                      layout_.road_y[layout_.ring_jh] - lane};
  const Rect oncoming_rect{ego_rect.x0 - 2 * lane, ego_rect.y0 - 2 * lane, ego_rect.x1 + 2 * lane,
                           ego_rect.y1 + 2 * lane};
  scene_.route = Route::rectangle(ego_rect);
  scene_.oncoming_loop = Route::rectangle(oncoming_rect);

  build_roads();
  build_markings();
  build_blocks();
  build_street_furniture();
  build_guardrails();
  build_perimeter();
  place_actors(plan);

  for (const SceneObject& obj : scene_.objects) {
    for (const Triangle& tri : obj.mesh) {
      scene_.bounds.expand(obj.transform.apply(tri.v0));
      scene_.bounds.expand(obj.transform.apply(tri.v1));
      scene_.bounds.expand(obj.transform.apply(tri.v2));
    }
  }
  return std::move(scene_);
}

}  // namespace

void MapTemplate::validate() const {
  if (grid_cols < 1 || grid_rows < 1) throw SceneError("template: grid must be at least 1x1");
  if (block_size <= 4 * sidewalk_width) throw SceneError("template: blocks too small");
  if (road_width <= 2.0) throw SceneError("template: road too narrow");
  if (building_min_height > building_max_height) {
    throw SceneError("template: building_min_height above building_max_height");
  }
  if (mesh_detail < 1 || mesh_detail > 16) throw SceneError("template: mesh_detail out of range");
  for (double f : {building_fraction, sign_fraction, fence_fraction, terrain_fraction,
                   guardrail_fraction}) {
    if (f < 0 || f > 1) throw SceneError("template: fraction outside [0,1]");
  }
}

int MapTemplate::actor_capacity(const std::string& class_name) const {
  const Layout layout(*this);
  const std::string base = base_class_name(class_name);
  const bool moving = class_name != base;

  const double road_total = (grid_cols + 1) * layout.height + (grid_rows + 1) * block_size *
                            static_cast<double>(grid_cols);
  const double loop_len =
      2.0 * ((layout.road_x[layout.ring_ih] - layout.road_x[layout.ring_il]) +
             (layout.road_y[layout.ring_jh] - layout.road_y[layout.ring_jl]));
  const double sidewalk_len = 4.0 * block_size * grid_cols * grid_rows;

  double cap = 0;
  if (base == "car") cap = moving ? loop_len / 10 : road_total / 8;
  else if (base == "truck") cap = moving ? loop_len / 14 : road_total / 14;
  else if (base == "motorcycle") cap = moving ? loop_len / 9 : road_total / 6;
  else if (base == "bicycle") cap = sidewalk_len / 7;
  else if (base == "person") cap = sidewalk_len / 5;
  else if (base == "bicyclist" || base == "motorcyclist") cap = loop_len / 9;
  else cap = 0;
  return static_cast<int>(std::min(cap, 500.0));
}

Route Route::rectangle(const Rect& rect) {
  Route route;
  route.corners_ = {Vec3{rect.x0, rect.y0, 0}, Vec3{rect.x1, rect.y0, 0},
                    Vec3{rect.x1, rect.y1, 0}, Vec3{rect.x0, rect.y1, 0}};
  for (int k = 0; k < 4; ++k) {
    route.segment_length_[k] = norm(route.corners_[(k + 1) % 4] - route.corners_[k]);
    route.length_ += route.segment_length_[k];
  }
  if (!(rect.width() > 0) || !(rect.height() > 0)) route.length_ = 0;
  return route;
}

RigidTransform Route::pose_at(double s, bool reverse) const {
  if (!valid()) throw SceneError("route has zero length");
  double u = wrap(reverse ? length_ - wrap(s, length_) : s, length_);
  int k = 0;
  while (k < 3 && u > segment_length_[k]) {
    u -= segment_length_[k];
    ++k;
  }
  const Vec3 dir = (corners_[(k + 1) % 4] - corners_[k]) / segment_length_[k];
  RigidTransform pose = RigidTransform::yaw(std::atan2(reverse ? -dir.y : dir.y,
                                                       reverse ? -dir.x : dir.x));
  pose.t = corners_[k] + dir * u;
  return pose;
}

bool Scene::has_motion() const {
  for (const SceneObject& obj : objects) {
    if (obj.motion.kind != MotionKind::kNone) return true;
  }
  return false;
}

std::size_t Scene::triangle_count() const {
  std::size_t n = 0;
  for (const SceneObject& obj : objects) n += obj.mesh.size();
  return n;
}

SceneSnapshot Scene::snapshot(double time) const {
  SceneSnapshot snap;
  snap.triangles.reserve(triangle_count());
  snap.object_labels.reserve(objects.size());

  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& obj = objects[i];
    RigidTransform tf = obj.transform;
    if (obj.motion.kind == MotionKind::kLoop) {
      tf = oncoming_loop.pose_at(obj.motion.s0 + obj.motion.speed * time, /*reverse=*/true);
    } else if (obj.motion.kind == MotionKind::kPingPong) {
      const double seg = norm(obj.motion.p1 - obj.motion.p0);
      if (seg > 0) {
        const double phase = wrap(obj.motion.s0 + obj.motion.speed * time, 2.0 * seg);
        const bool back = phase > seg;
        const double u = back ? 2.0 * seg - phase : phase;
        const Vec3 dir = (obj.motion.p1 - obj.motion.p0) / seg;
        const Vec3 heading = back ? -dir : dir;
        tf = RigidTransform::yaw(std::atan2(heading.y, heading.x));
        tf.t = obj.motion.p0 + dir * u;
      }
    }
    for (const Triangle& tri : obj.mesh) {
      snap.triangles.push_back({tf.apply(tri.v0), tf.apply(tri.v1), tf.apply(tri.v2),
                                static_cast<std::uint32_t>(i)});
    }
    snap.object_labels.push_back({obj.raw_class, obj.instance_id});
  }
  return snap;
}

int SpawnPlan::total() const {
  int n = 0;
  for (const auto& [_, count] : counts) n += count;
  return n;
}

Scene generate_scene(const MapTemplate& map, const SpawnPlan& plan, const Taxonomy& taxonomy,
                     std::uint64_t seed) {
  map.validate();
  SceneBuilder builder(map, taxonomy, seed);
  return builder.build(plan);
}

std::vector<RigidTransform> ego_trajectory(const Scene& scene, int n_scans, double speed_mps,
                                           double rate_hz, std::uint64_t seed) {
  (void)seed;
  if (!scene.route.valid()) throw SceneError("scene has no drivable lane loop");
  if (n_scans < 1) throw SceneError("trajectory needs at least one scan");
  if (!(rate_hz > 0) || speed_mps < 0) throw SceneError("trajectory: bad speed or rate");

  std::vector<RigidTransform> poses;
  poses.reserve(n_scans);
  const double step = speed_mps / rate_hz;
  for (int k = 0; k < n_scans; ++k) {
    poses.push_back(scene.route.pose_at(step * k));
  }
  return poses;
}

void append_ego(SceneSnapshot& snapshot, const RigidTransform& ego_pose, std::uint16_t raw_class,
                std::uint16_t instance_id) {
  const std::uint32_t ref = static_cast<std::uint32_t>(snapshot.object_labels.size());
  for (const Triangle& tri : ego_mesh()) {
    snapshot.triangles.push_back(
        {ego_pose.apply(tri.v0), ego_pose.apply(tri.v1), ego_pose.apply(tri.v2), ref});
  }
  snapshot.object_labels.push_back({raw_class, instance_id});
}

namespace {

MapTemplate make_preset(const std::string& name) {
  MapTemplate t;
  t.name = name;
  if (name == "downtown") {
    // dense street canyon; the demo template
  } else if (name == "midtown") {
    t.grid_cols = 5;
    t.grid_rows = 4;
    t.block_size = 42;
    t.building_fraction = 0.85;
    t.building_min_height = 10;
    t.building_max_height = 22;
    t.tree_spacing = 12;
  } else if (name == "suburb") {
    t.grid_cols = 5;
    t.grid_rows = 5;
    t.block_size = 46;
    t.building_fraction = 0.7;
    t.building_min_height = 5;
    t.building_max_height = 9;
    t.fence_fraction = 0.55;
    t.terrain_fraction = 0.8;
    t.tree_spacing = 9;
    t.perimeter_tree_rows = 4;
  } else if (name == "industrial") {
    t.grid_cols = 3;
    t.grid_rows = 3;
    t.block_size = 58;
    t.road_width = 10;
    t.building_fraction = 0.65;
    t.building_min_height = 8;
    t.building_max_height = 14;
    t.fence_fraction = 0.75;
    t.terrain_fraction = 0.3;
    t.tree_spacing = 22;
    t.guardrail_fraction = 0.6;
    t.sign_fraction = 0.35;
  } else if (name == "campus") {
    t.grid_cols = 4;
    t.grid_rows = 3;
    t.block_size = 50;
    t.building_fraction = 0.5;
    t.building_min_height = 9;
    t.building_max_height = 18;
    t.terrain_fraction = 0.9;
    t.tree_spacing = 8;
    t.perimeter_tree_rows = 4;
  } else if (name == "oldtown") {
    t.grid_cols = 3;
    t.grid_rows = 4;
    t.block_size = 32;
    t.road_width = 7;
    t.sidewalk_width = 2.4;
    t.building_fraction = 0.92;
    t.building_min_height = 8;
    t.building_max_height = 15;
    t.tree_spacing = 16;
    t.pole_spacing = 18;
  } else if (name == "parkside") {
    t.grid_cols = 4;
    t.grid_rows = 4;
    t.block_size = 44;
    t.building_fraction = 0.45;
    t.building_min_height = 7;
    t.building_max_height = 16;
    t.terrain_fraction = 0.95;
    t.tree_spacing = 7;
    t.fence_fraction = 0.4;
    t.perimeter_tree_rows = 5;
  }
  return t;
}

}  // namespace

const std::vector<MapTemplate>& shipped_templates() {
  static const std::vector<MapTemplate> presets = [] {
    std::vector<MapTemplate> out;
    for (const char* name :
         {"downtown", "midtown", "suburb", "industrial", "campus", "oldtown", "parkside"}) {
      out.push_back(make_preset(name));
    }
    return out;
  }();
  return presets;
}

const MapTemplate& find_template(const std::string& name) {
  const std::string wanted = name == "demo_urban" ? "downtown" : name;
  for (const MapTemplate& t : shipped_templates()) {
    if (t.name == wanted) return t;
  }
  throw SceneError("unknown map template '" + name + "'");
}

MapTemplate MapTemplate::parse(std::string_view text) {
  MapTemplate t;
  t.name = "custom";
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    ls >> eq;
    std::string value;
    std::getline(ls, value);
    const auto start = value.find_first_not_of(" \t");
    value = start == std::string::npos ? "" : value.substr(start);
    const auto end = value.find_last_not_of(" \t\r");
    if (end != std::string::npos) value = value.substr(0, end + 1);
    if (eq != "=" || value.empty()) {
      throw SceneError("template line " + std::to_string(line_no) + ": expected key = value");
    }

    auto as_int = [&](int& field) { field = std::stoi(value); };
    auto as_double = [&](double& field) { field = std::stod(value); };
    try {
      if (key == "name") t.name = value;
      else if (key == "grid_cols") as_int(t.grid_cols);
      else if (key == "grid_rows") as_int(t.grid_rows);
      else if (key == "block_size") as_double(t.block_size);
      else if (key == "road_width") as_double(t.road_width);
      else if (key == "sidewalk_width") as_double(t.sidewalk_width);
      else if (key == "building_fraction") as_double(t.building_fraction);
      else if (key == "building_min_height") as_double(t.building_min_height);
      else if (key == "building_max_height") as_double(t.building_max_height);
      else if (key == "building_setback") as_double(t.building_setback);
      else if (key == "tree_spacing") as_double(t.tree_spacing);
      else if (key == "pole_spacing") as_double(t.pole_spacing);
      else if (key == "sign_fraction") as_double(t.sign_fraction);
      else if (key == "fence_fraction") as_double(t.fence_fraction);
      else if (key == "terrain_fraction") as_double(t.terrain_fraction);
      else if (key == "guardrail_fraction") as_double(t.guardrail_fraction);
      else if (key == "perimeter_tree_rows") as_int(t.perimeter_tree_rows);
      else if (key == "mesh_detail") as_int(t.mesh_detail);
      else throw SceneError("template line " + std::to_string(line_no) + ": unknown key '" +
                            key + "'");
    } catch (const SceneError&) {
      throw;
    } catch (const std::exception&) {
      throw SceneError("template line " + std::to_string(line_no) + ": bad value '" + value +
                       "' for " + key);
    }
  }
  t.validate();
  return t;
}

std::string MapTemplate::serialize() const {
  std::ostringstream out;
  out << "name = " << name << "\n"
      << "grid_cols = " << grid_cols << "\n"
      << "grid_rows = " << grid_rows << "\n"
      << "block_size = " << block_size << "\n"
      << "road_width = " << road_width << "\n"
      << "sidewalk_width = " << sidewalk_width << "\n"
      << "building_fraction = " << building_fraction << "\n"
      << "building_min_height = " << building_min_height << "\n"
      << "building_max_height = " << building_max_height << "\n"
      << "building_setback = " << building_setback << "\n"
      << "tree_spacing = " << tree_spacing << "\n"
      << "pole_spacing = " << pole_spacing << "\n"
      << "sign_fraction = " << sign_fraction << "\n"
      << "fence_fraction = " << fence_fraction << "\n"
      << "terrain_fraction = " << terrain_fraction << "\n"
      << "guardrail_fraction = " << guardrail_fraction << "\n"
      << "perimeter_tree_rows = " << perimeter_tree_rows << "\n"
      << "mesh_detail = " << mesh_detail << "\n";
  return out.str();
}

Scene benchmark_scene(std::size_t min_triangles, const Taxonomy& taxonomy, std::uint64_t seed) {
  MapTemplate t = find_template("downtown");
  for (int detail = 1; detail <= 16; ++detail) {
    t.mesh_detail = detail;
    Scene scene = generate_scene(t, {}, taxonomy, seed);
    if (scene.triangle_count() >= min_triangles) return scene;
  }
  throw SceneError("benchmark scene cannot reach requested triangle count");
}

}  // namespace lidarsynth
