#pragma once

// Executes modeling sequences into queryable solids. A solid is an
// occupancy model: point classification plus boundary-filtered surface
// sampling, not a B-rep. Immutable after construction; all queries are
// const and safe to run concurrently.

#include <cstdint>
#include <utility>
#include <vector>

#include "cadrec/dsl.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/sketch2d.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

// World position of a sketch-local point: R * (scale * (p.x, p.y, 0) +
// (0, 0, z_offset)) + translation. The scale never applies to z_offset.
Vec3 transform_point(const Vec2& p, const Extrusion& e, double z_offset);

// Oriented box given by 8 corners plus its axis-aligned hull.
struct Bbox3 {
  std::array<Vec3, 8> corners{};
  Aabb3 hull;
};

class ExtrusionCylinder {
 public:
  ExtrusionCylinder(const Sketch& sketch, const Extrusion& extrusion,
                    double chord_tol = kDefaultChordTol);

  // Local frame of a world point: (x, y) in sketch units (scale divided
  // out), z the offset along the sketch-plane normal.
  Vec3 to_local(const Vec3& world) const;
  Vec3 to_world(const Vec2& sketch_point, double z_offset) const;

  bool contains(const Vec3& world) const;

  // Corners of the sketch parameter bounds swept to d- and d+, plus the
  // axis-aligned hull of those 8 corners.
  Bbox3 bounds() const;

  const Extrusion& extrusion() const { return extrusion_; }
  const DiscretizedSketch& sketch() const { return sketch_; }
  const Mat3& rotation() const { return rotation_; }
  // min/max over the sketch's curve control points
  const Aabb2& sketch_bounds() const { return sketch_bounds_; }

  // Total boundary area in world units (caps + walls), used for sampling.
  double boundary_area() const;

 private:
  friend class Solid;

  bool sketch_contains(const Vec2& p) const;

  Extrusion extrusion_;
  DiscretizedSketch sketch_;
  Mat3 rotation_;
  Mat3 rotation_inv_;
  Aabb2 sketch_bounds_;   // control-point bounds
  Aabb2 polygon_bounds_;  // discretized-geometry bounds

  // Tri-state 2D occupancy grid over the sketch plane; boundary cells
  // fall back to the exact even-odd test.
  enum class Cell : std::uint8_t { Outside = 0, Inside = 1, Boundary = 2 };
  int grid_res_ = 0;
  Vec2 grid_origin_;
  double grid_cell_ = 0.0;
  std::vector<Cell> grid_;
  void build_grid();
};

class Solid {
 public:
  Solid() = default;

  static Solid from_sequence(const CadSequence& seq, double chord_tol = kDefaultChordTol);

  void add_step(const Sketch& sketch, const Extrusion& extrusion, BooleanOp op,
                double chord_tol = kDefaultChordTol);

  bool empty() const { return steps_.empty(); }
  std::size_t step_count() const { return steps_.size(); }
  const ExtrusionCylinder& cylinder(std::size_t i) const { return steps_[i].first; }
  BooleanOp op(std::size_t i) const { return steps_[i].second; }

  // Folds union/subtraction over the steps in order.
  bool occupied(const Vec3& q) const;

  // Axis-aligned hull of all cylinder bounds (conservative).
  Aabb3 approx_bounds() const;

  // Exactly n points on the final boundary with outward unit normals,
  // deterministic per seed. Throws EmptySolidError when nothing remains,
  // UndersampleError when the attempt budget runs out.
  PointCloud sample_surface(int n, std::uint64_t seed) const;

 private:
  std::vector<std::pair<ExtrusionCylinder, BooleanOp>> steps_;
};

// Boundary probe offset for surface-sample filtering, in unit-box units.
inline constexpr double kSurfaceProbeEps = 1e-3;

}  // namespace cadrec
