#pragma once

// Geometric single-step reconstruction: from one planar prompt and the
// reference cloud, recover a sketch profile on the prompt plane, the
// extruded extent along its normal, and the boolean flag, yielding one
// candidate modeling step.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "cadrec/dsl.hpp"
#include "cadrec/guidance.hpp"
#include "cadrec/kdtree.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/solid.hpp"

namespace cadrec {

// Orthonormal in-plane frame. The first axis is the projection of the
// world axis least parallel to the normal (lowest index on ties), the
// second is normal x first.
struct PlaneFrame {
  Vec3 origin{0, 0, 0};  // offset * normal
  Vec3 u{1, 0, 0};
  Vec3 v{0, 1, 0};
  Vec3 n{0, 0, 1};

  Vec2 project(const Vec3& p) const {
    Vec3 d = p - origin;
    return {d.dot(u), d.dot(v)};
  }
  double height(const Vec3& p) const { return (p - origin).dot(n); }
  Vec3 unproject(const Vec2& q, double h) const { return origin + u * q.x + v * q.y + n * h; }
  Mat3 rotation() const { return Mat3::from_columns(u, v, n); }
};

PlaneFrame plane_frame(const Plane& plane);

struct StepFitParams {
  // Lower bound on the grid cell; the profile uses
  // max(cell, cell_spacing_factor * estimated in-plane point spacing)
  // so sparse slabs still produce solid profiles.
  double cell = 1.0 / 128.0;
  double cell_spacing_factor = 1.7;
  double slab_half = 0.02;
  double fit_tol_cells = 2.0;  // loop fit tolerance, in cells
  double snap_tol = 0.01;      // extents this close to the plane snap to 0
  double min_thickness = 0.02;
  double gap_tol = 0.04;       // max gap within one extruded depth band
  int min_slab_points = 16;
  double chord_tol = kDefaultChordTol;
};

// Binary occupancy of the prompt plane's neighborhood, in-plane lattice.
struct ProfileGrid {
  PlaneFrame frame;
  Vec2 uv_origin;  // plane coordinates of lattice point (0, 0)
  double cell = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> cells;
  std::vector<Vec2> slab_points;  // in-plane positions that built the grid

  bool filled(int x, int y) const {
    return x >= 0 && x < nx && y >= 0 && y < ny &&
           cells[static_cast<std::size_t>(y) * nx + x] != 0;
  }
  Vec2 lattice_to_plane(double x, double y) const {
    return {uv_origin.x + x * cell, uv_origin.y + y * cell};
  }
  bool contains_plane_point(const Vec2& q) const {
    return filled(static_cast<int>(std::floor((q.x - uv_origin.x) / cell)),
                  static_cast<int>(std::floor((q.y - uv_origin.y) / cell)));
  }
  int filled_count() const;
};

// Cells containing reference points within the plane slab, closed with a
// radius-1 morphological pass. Throws InsufficientSupportError with fewer
// than min_slab_points points in the slab.
ProfileGrid extract_profile(const PlanePrompt& prompt, const PointCloud& p_ref,
                            const StepFitParams& params);

// Traces outer/inner contours of the grid's filled components and fits
// curves: a whole-contour circle when one fits, otherwise a polygon with
// arcs substituted over runs of contour vertices lying on one circle.
// The sketch is returned in plane coordinates (not yet normalized).
// Throws DegenerateProfileError when no component is at least 4 cells
// across. max_residual_cells, when given, receives the worst curve fit
// residual in cell units.
Sketch fit_loops(const ProfileGrid& grid, const StepFitParams& params,
                 double* max_residual_cells = nullptr);

struct ExtrusionExtent {
  double d_minus = 0.0;
  double d_plus = 0.0;
  std::vector<int> depth_histogram;  // diagnostics, 16 bins over the band
};

// Signed-offset extent of the reference points whose in-plane position
// falls inside the profile: the contiguous depth band containing the
// prompt plane, trimmed to its 1st/99th percentiles, with near-zero ends
// snapped to the plane. Throws FlatCandidateError below min_thickness.
ExtrusionExtent estimate_extrusion(const PlanePrompt& prompt, const PointCloud& p_ref,
                                   const ProfileGrid& grid, const StepFitParams& params);

// Executes state+candidate under both flags and keeps the flag whose
// surface sample has the lower chamfer distance against the target; ties
// go to union; an empty state always yields union. Throws
// InvalidCandidateError when neither flag executes.
BooleanOp choose_boolean(const Sketch& sketch, const Extrusion& extrusion, const Solid& state,
                         const PointCloud& p_full, const KdTree3& p_full_tree,
                         std::uint64_t seed, int samples = 4096);

struct CandidateDiagnostics {
  int grid_nx = 0;
  int grid_ny = 0;
  double cell = 0.0;
  double max_loop_residual = 0.0;  // in cells
  std::vector<int> depth_histogram;

  nlohmann::json to_json() const;
};

struct CandidateStep {
  ModelingStep step;
  PlanePrompt prompt;
  CandidateDiagnostics diag;
};

// Normalizes a plane-coordinate sketch into [0,1]^2 and folds placement
// and size into the extrusion (also used by the synthetic generator).
ModelingStep make_step(const PlaneFrame& frame, const Sketch& sketch_in_plane, double d_minus,
                       double d_plus, BooleanOp op);

// Full composition; a prompt that fails any stage yields nullopt.
std::optional<CandidateStep> reconstruct_step(const PlanePrompt& prompt, const RefCloud& p_ref,
                                              const PointCloud& p_full,
                                              const KdTree3& p_full_tree, const Solid& state,
                                              const StepFitParams& params, std::uint64_t seed);

}  // namespace cadrec
