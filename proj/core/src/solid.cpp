#include "cadrec/solid.hpp"

#include <algorithm>
#include <cmath>

#include "cadrec/errors.hpp"
#include "cadrec/rng.hpp"

namespace cadrec {

Vec3 transform_point(const Vec2& p, const Extrusion& e, double z_offset) {
  Mat3 r = e.rotation();
  Vec3 local{e.scale * p.x, e.scale * p.y, z_offset};
  return r * local + e.translation;
}

ExtrusionCylinder::ExtrusionCylinder(const Sketch& sketch, const Extrusion& extrusion,
                                     double chord_tol)
    : extrusion_(extrusion),
      sketch_(discretize_sketch(sketch, chord_tol)),
      rotation_(extrusion.rotation()),
      rotation_inv_(rotation_.transpose()) {
  for (const Face& f : sketch.faces) {
    auto expand_loop = [&](const Loop& l) {
      for (const Curve& c : l.curves)
        for (const Vec2& p : c.points) sketch_bounds_.expand(p);
    };
    expand_loop(f.outer);
    for (const Loop& l : f.inner) expand_loop(l);
  }
  polygon_bounds_ = sketch_.bounds();
  build_grid();
}

Vec3 ExtrusionCylinder::to_local(const Vec3& world) const {
  Vec3 l = rotation_inv_ * (world - extrusion_.translation);
  return {l.x / extrusion_.scale, l.y / extrusion_.scale, l.z};
}

Vec3 ExtrusionCylinder::to_world(const Vec2& sketch_point, double z_offset) const {
  Vec3 local{extrusion_.scale * sketch_point.x, extrusion_.scale * sketch_point.y, z_offset};
  return rotation_ * local + extrusion_.translation;
}

void ExtrusionCylinder::build_grid() {
  const int res = 64;
  if (polygon_bounds_.empty()) return;
  Vec2 ext = polygon_bounds_.extent();
  double cell = std::max(ext.x, ext.y) / res;
  if (cell <= 0) return;
  // pad by one cell so boundary rounding stays inside the grid
  grid_origin_ = polygon_bounds_.lo - Vec2{cell, cell};
  int nx = static_cast<int>(std::ceil(ext.x / cell)) + 2;
  int ny = static_cast<int>(std::ceil(ext.y / cell)) + 2;
  grid_res_ = std::max(nx, ny);
  grid_cell_ = cell;
  grid_.assign(static_cast<std::size_t>(grid_res_) * grid_res_, Cell::Outside);

  auto mark_boundary = [&](const std::vector<Vec2>& poly) {
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      Vec2 a = poly[j], b = poly[i];
      // conservative rasterization of the segment into cells
      double len = (b - a).norm();
      int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * cell))));
      for (int s = 0; s <= steps; ++s) {
        Vec2 p = a + (b - a) * (static_cast<double>(s) / steps);
        int cx = static_cast<int>(std::floor((p.x - grid_origin_.x) / cell));
        int cy = static_cast<int>(std::floor((p.y - grid_origin_.y) / cell));
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int x = cx + dx, y = cy + dy;
            if (x >= 0 && x < grid_res_ && y >= 0 && y < grid_res_)
              grid_[static_cast<std::size_t>(y) * grid_res_ + x] = Cell::Boundary;
          }
      }
    }
  };
  for (const FacePolygons& f : sketch_.faces) {
    mark_boundary(f.outer);
    for (const auto& in : f.inners) mark_boundary(in);
  }
  for (int y = 0; y < grid_res_; ++y)
    for (int x = 0; x < grid_res_; ++x) {
      Cell& c = grid_[static_cast<std::size_t>(y) * grid_res_ + x];
      if (c == Cell::Boundary) continue;
      Vec2 center{grid_origin_.x + (x + 0.5) * cell, grid_origin_.y + (y + 0.5) * cell};
      c = point_in_sketch(center, sketch_) ? Cell::Inside : Cell::Outside;
    }
}

bool ExtrusionCylinder::sketch_contains(const Vec2& p) const {
  if (grid_res_ > 0) {
    int cx = static_cast<int>(std::floor((p.x - grid_origin_.x) / grid_cell_));
    int cy = static_cast<int>(std::floor((p.y - grid_origin_.y) / grid_cell_));
    if (cx < 0 || cx >= grid_res_ || cy < 0 || cy >= grid_res_) return false;
    Cell c = grid_[static_cast<std::size_t>(cy) * grid_res_ + cx];
    if (c != Cell::Boundary) return c == Cell::Inside;
  }
  return point_in_sketch(p, sketch_);
}

bool ExtrusionCylinder::contains(const Vec3& world) const {
  Vec3 local = to_local(world);
  if (local.z < extrusion_.d_minus || local.z > extrusion_.d_plus) return false;
  return sketch_contains({local.x, local.y});
}

Bbox3 ExtrusionCylinder::bounds() const {
  Bbox3 box;
  const Aabb2& b = sketch_bounds_;
  const Vec2 corners2[4] = {{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}};
  for (int i = 0; i < 4; ++i) {
    box.corners[i] = to_world(corners2[i], extrusion_.d_minus);
    box.corners[4 + i] = to_world(corners2[i], extrusion_.d_plus);
  }
  for (const Vec3& c : box.corners) box.hull.expand(c);
  return box;
}

double ExtrusionCylinder::boundary_area() const {
  double caps = 0.0, walls = 0.0;
  const double s = extrusion_.scale;
  const double h = extrusion_.thickness();
  for (const FacePolygons& f : sketch_.faces) {
    double area = std::abs(polygon_area(f.outer));
    for (const auto& in : f.inners) area -= std::abs(polygon_area(in));
    caps += std::max(0.0, area);
    auto wall_len = [](const std::vector<Vec2>& poly) {
      double len = 0.0;
      std::size_t n = poly.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) len += (poly[i] - poly[j]).norm();
      return len;
    };
    double len = wall_len(f.outer);
    for (const auto& in : f.inners) len += wall_len(in);
    walls += len * s * h;
  }
  return 2.0 * caps * s * s + walls;
}

Solid Solid::from_sequence(const CadSequence& seq, double chord_tol) {
  Solid solid;
  for (const ModelingStep& step : seq.steps)
    solid.add_step(step.sketch, step.extrusion, step.op, chord_tol);
  return solid;
}

void Solid::add_step(const Sketch& sketch, const Extrusion& extrusion, BooleanOp op,
                     double chord_tol) {
  steps_.emplace_back(ExtrusionCylinder(sketch, extrusion, chord_tol), op);
}

bool Solid::occupied(const Vec3& q) const {
  bool occ = false;
  for (const auto& [cyl, op] : steps_) {
    if (op == BooleanOp::Union) {
      if (!occ) occ = cyl.contains(q);
    } else {
      if (occ && cyl.contains(q)) occ = false;
    }
  }
  return occ;
}

Aabb3 Solid::approx_bounds() const {
  Aabb3 box;
  for (const auto& [cyl, op] : steps_)
    if (op == BooleanOp::Union) box.expand(cyl.bounds().hull);
  return box;
}

namespace {

// One area-weighted boundary patch of a cylinder: a cap of one face or a
// wall strip of one polygon edge.
struct Emitter {
  const ExtrusionCylinder* cyl = nullptr;
  const FacePolygons* face = nullptr;  // cap
  bool top = false;
  Vec2 edge_a, edge_b;  // wall
  bool is_cap = false;
  double area = 0.0;
};

}  // namespace

PointCloud Solid::sample_surface(int n, std::uint64_t seed) const {
  if (steps_.empty()) throw EmptySolidError("solid has no steps");

  std::vector<Emitter> emitters;
  double total_area = 0.0;
  for (const auto& step : steps_) {
    const ExtrusionCylinder& cyl = step.first;
    const double s = cyl.extrusion().scale;
    const double h = cyl.extrusion().thickness();
    for (const FacePolygons& f : cyl.sketch().faces) {
      double area = std::abs(polygon_area(f.outer));
      for (const auto& in : f.inners) area -= std::abs(polygon_area(in));
      area = std::max(0.0, area) * s * s;
      for (bool top : {false, true}) {
        Emitter e;
        e.cyl = &cyl;
        e.face = &f;
        e.top = top;
        e.is_cap = true;
        e.area = area;
        if (area > 0) emitters.push_back(e);
      }
      auto add_walls = [&](const std::vector<Vec2>& poly) {
        std::size_t m = poly.size();
        for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
          Emitter e;
          e.cyl = &cyl;
          e.edge_a = poly[j];
          e.edge_b = poly[i];
          e.is_cap = false;
          e.area = (poly[i] - poly[j]).norm() * s * h;
          if (e.area > 0) emitters.push_back(e);
        }
      };
      add_walls(f.outer);
      for (const auto& in : f.inners) add_walls(in);
    }
  }
  for (const Emitter& e : emitters) total_area += e.area;
  if (emitters.empty() || total_area <= 0) throw EmptySolidError("solid has no boundary area");

  std::vector<double> cdf(emitters.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < emitters.size(); ++i) {
    acc += emitters[i].area;
    cdf[i] = acc;
  }

  Rng rng(seed);

  // cheap emptiness probe before burning the whole sampling budget
  Aabb3 hull = approx_bounds();
  bool any_occupied = false;
  for (int i = 0; i < 8192 && !any_occupied; ++i) {
    Vec3 q{rng.uniform(hull.lo.x, hull.hi.x), rng.uniform(hull.lo.y, hull.hi.y),
           rng.uniform(hull.lo.z, hull.hi.z)};
    any_occupied = occupied(q);
  }
  if (!any_occupied) throw EmptySolidError("solid executes to empty occupancy");

  PointCloud cloud;
  cloud.positions.reserve(n);
  cloud.normals.reserve(n);

  const long long max_attempts = 200LL * n + 10000;
  long long attempts = 0;
  while (static_cast<int>(cloud.size()) < n && attempts < max_attempts) {
    ++attempts;
    double u = rng.uniform() * total_area;
    std::size_t k = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (k >= emitters.size()) k = emitters.size() - 1;
    const Emitter& e = emitters[k];
    const Extrusion& ex = e.cyl->extrusion();

    Vec3 world, normal;
    if (e.is_cap) {
      // rejection sample the face region in sketch coordinates
      Aabb2 fb;
      for (const Vec2& p : e.face->outer) fb.expand(p);
      Vec2 p;
      bool ok = false;
      for (int tries = 0; tries < 32; ++tries) {
        p = {rng.uniform(fb.lo.x, fb.hi.x), rng.uniform(fb.lo.y, fb.hi.y)};
        if (point_in_face(p, *e.face)) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      world = e.cyl->to_world(p, e.top ? ex.d_plus : ex.d_minus);
      normal = e.cyl->rotation() * Vec3{0, 0, e.top ? 1.0 : -1.0};
    } else {
      double t = rng.uniform();
      double z = rng.uniform(ex.d_minus, ex.d_plus);
      Vec2 p = e.edge_a + (e.edge_b - e.edge_a) * t;
      world = e.cyl->to_world(p, z);
      Vec2 dir = (e.edge_b - e.edge_a).normalized();
      // in-plane perpendicular; orientation fixed below by the flip test
      normal = (e.cyl->rotation() * Vec3{-dir.y, dir.x, 0}).normalized();
    }

    bool out_pos = occupied(world + normal * kSurfaceProbeEps);
    bool out_neg = occupied(world - normal * kSurfaceProbeEps);
    if (out_pos == out_neg) continue;  // interior or fully removed patch
    if (out_pos) normal = -normal;     // make it point outward
    cloud.append(world, normal);
  }

  if (static_cast<int>(cloud.size()) < n)
    throw UndersampleError(static_cast<int>(cloud.size()), n);
  return cloud;
}

}  // namespace cadrec
