#include "cadrec/stepfit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cadrec/errors.hpp"
#include "cadrec/metrics.hpp"

namespace cadrec {

PlaneFrame plane_frame(const Plane& plane) {
  PlaneFrame f;
  f.n = plane.normal.normalized();
  f.origin = f.n * plane.offset;
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int pick = 0;
  double best = 2.0;
  for (int i = 0; i < 3; ++i) {
    double a = std::abs(axes[i].dot(f.n));
    if (a < best - 1e-12) {
      best = a;
      pick = i;
    }
  }
  Vec3 u = axes[pick] - f.n * axes[pick].dot(f.n);
  f.u = u.normalized();
  f.v = f.n.cross(f.u);
  return f;
}

int ProfileGrid::filled_count() const {
  int count = 0;
  for (std::uint8_t c : cells) count += c != 0;
  return count;
}

ProfileGrid extract_profile(const PlanePrompt& prompt, const PointCloud& p_ref,
                            const StepFitParams& params) {
  if (p_ref.empty()) throw InsufficientSupportError("reference cloud is empty");
  ProfileGrid grid;
  grid.frame = plane_frame(prompt.plane);

  std::vector<Vec2> slab;
  for (const Vec3& p : p_ref.positions)
    if (std::abs(grid.frame.height(p)) <= params.slab_half) slab.push_back(grid.frame.project(p));
  if (static_cast<int>(slab.size()) < params.min_slab_points)
    throw InsufficientSupportError("only " + std::to_string(slab.size()) +
                                   " points in the prompt plane slab");

  Aabb2 bounds;
  for (const Vec2& q : slab) bounds.expand(q);
  // cell size follows the slab's point density so interiors come out solid
  double area = std::max(bounds.extent().x * bounds.extent().y, 1e-12);
  double spacing = std::sqrt(area / static_cast<double>(slab.size()));
  grid.cell = std::max(params.cell, params.cell_spacing_factor * spacing);

  // two cells of padding so closing and contour tracing never clip
  grid.uv_origin = bounds.lo - Vec2{2 * grid.cell, 2 * grid.cell};
  grid.nx = static_cast<int>(std::ceil(bounds.extent().x / grid.cell)) + 5;
  grid.ny = static_cast<int>(std::ceil(bounds.extent().y / grid.cell)) + 5;
  grid.cells.assign(static_cast<std::size_t>(grid.nx) * grid.ny, 0);

  for (const Vec2& q : slab) {
    int x = static_cast<int>(std::floor((q.x - grid.uv_origin.x) / grid.cell));
    int y = static_cast<int>(std::floor((q.y - grid.uv_origin.y) / grid.cell));
    if (x >= 0 && x < grid.nx && y >= 0 && y < grid.ny)
      grid.cells[static_cast<std::size_t>(y) * grid.nx + x] = 1;
  }
  grid.slab_points = std::move(slab);

  // morphological closing, radius 1 (3x3 structuring element)
  auto at = [&](const std::vector<std::uint8_t>& g, int x, int y) -> std::uint8_t {
    return (x >= 0 && x < grid.nx && y >= 0 && y < grid.ny)
               ? g[static_cast<std::size_t>(y) * grid.nx + x]
               : 0;
  };
  std::vector<std::uint8_t> dilated(grid.cells.size(), 0);
  for (int y = 0; y < grid.ny; ++y)
    for (int x = 0; x < grid.nx; ++x) {
      std::uint8_t v = 0;
      for (int dy = -1; dy <= 1 && !v; ++dy)
        for (int dx = -1; dx <= 1 && !v; ++dx) v = at(grid.cells, x + dx, y + dy);
      dilated[static_cast<std::size_t>(y) * grid.nx + x] = v;
    }
  for (int y = 0; y < grid.ny; ++y)
    for (int x = 0; x < grid.nx; ++x) {
      std::uint8_t v = 1;
      for (int dy = -1; dy <= 1 && v; ++dy)
        for (int dx = -1; dx <= 1 && v; ++dx) v = at(dilated, x + dx, y + dy);
      grid.cells[static_cast<std::size_t>(y) * grid.nx + x] = v;
    }
  return grid;
}

namespace {

// --- contour extraction ---------------------------------------------------
// Boundary edges between filled and empty cells, chained into closed
// lattice-corner loops. Interior stays on the left, so outer boundaries
// come out counter-clockwise and holes clockwise.

struct LatticePoint {
  int x, y;
  bool operator<(const LatticePoint& o) const { return x < o.x || (x == o.x && y < o.y); }
  bool operator==(const LatticePoint& o) const { return x == o.x && y == o.y; }
};

struct BoundaryEdge {
  LatticePoint from, to;
  bool used = false;
};

std::vector<std::vector<LatticePoint>> trace_contours(const ProfileGrid& grid) {
  std::vector<BoundaryEdge> edges;
  for (int y = 0; y < grid.ny; ++y)
    for (int x = 0; x < grid.nx; ++x) {
      if (!grid.filled(x, y)) continue;
      if (!grid.filled(x, y - 1)) edges.push_back({{x, y}, {x + 1, y}});
      if (!grid.filled(x + 1, y)) edges.push_back({{x + 1, y}, {x + 1, y + 1}});
      if (!grid.filled(x, y + 1)) edges.push_back({{x + 1, y + 1}, {x, y + 1}});
      if (!grid.filled(x - 1, y)) edges.push_back({{x, y + 1}, {x, y}});
    }

  std::map<LatticePoint, std::vector<int>> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i)
    outgoing[edges[i].from].push_back(static_cast<int>(i));

  auto turn_score = [](int in_dx, int in_dy, int out_dx, int out_dy) {
    // prefer the sharpest left turn; cross > 0 is a left turn
    int cross = in_dx * out_dy - in_dy * out_dx;
    int dot = in_dx * out_dx + in_dy * out_dy;
    if (cross > 0) return 3;         // left
    if (cross == 0 && dot > 0) return 2;  // straight
    return 1;                        // right (u-turns cannot occur)
  };

  std::vector<std::vector<LatticePoint>> loops;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (edges[start].used) continue;
    std::vector<LatticePoint> loop;
    int current = static_cast<int>(start);
    while (!edges[current].used) {
      edges[current].used = true;
      loop.push_back(edges[current].from);
      const LatticePoint& tip = edges[current].to;
      int in_dx = tip.x - edges[current].from.x;
      int in_dy = tip.y - edges[current].from.y;
      int next = -1, best_score = 0;
      for (int cand : outgoing[tip]) {
        if (edges[cand].used && cand != static_cast<int>(start)) continue;
        int score = turn_score(in_dx, in_dy, edges[cand].to.x - tip.x, edges[cand].to.y - tip.y);
        if (score > best_score) {
          best_score = score;
          next = cand;
        }
      }
      if (next < 0 || next == static_cast<int>(start)) break;  // loop closed
      current = next;
    }
    if (loop.size() >= 4) loops.push_back(std::move(loop));
  }
  return loops;
}

double lattice_area(const std::vector<LatticePoint>& loop) {
  double a = 0.0;
  std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    a += static_cast<double>(loop[j].x) * loop[i].y - static_cast<double>(loop[i].x) * loop[j].y;
  return 0.5 * a;
}

// --- curve fitting ---------------------------------------------------------

struct CircleFit {
  Vec2 center;
  double radius = 0.0;
  double max_residual = 1e30;
};

CircleFit fit_circle(const std::vector<Vec2>& pts, std::size_t begin, std::size_t end) {
  CircleFit fit;
  std::size_t n = end - begin;
  if (n < 3) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0, sz = 0;
  for (std::size_t i = begin; i < end; ++i) {
    double x = pts[i].x, y = pts[i].y, z = x * x + y * y;
    sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    sxz += x * z; syz += y * z; sz += z;
  }
  double nn = static_cast<double>(n);
  // solve [sxx sxy sx; sxy syy sy; sx sy n] [p q r]' = [sxz syz sz]
  double a[3][4] = {{sxx, sxy, sx, sxz}, {sxy, syy, sy, syz}, {sx, sy, nn, sz}};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-12) return fit;
    std::swap(a[col], a[pivot]);
    for (int row = 0; row < 3; ++row) {
      if (row == col) continue;
      double f = a[row][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[row][k] -= f * a[col][k];
    }
  }
  double p = a[0][3] / a[0][0];
  double q = a[1][3] / a[1][1];
  double r = a[2][3] / a[2][2];
  fit.center = {p / 2.0, q / 2.0};
  double r2 = r + fit.center.norm2();
  if (r2 <= 0) return fit;
  fit.radius = std::sqrt(r2);
  fit.max_residual = 0.0;
  for (std::size_t i = begin; i < end; ++i)
    fit.max_residual =
        std::max(fit.max_residual, std::abs((pts[i] - fit.center).norm() - fit.radius));
  return fit;
}

void douglas_peucker(const std::vector<Vec2>& pts, std::size_t i0, std::size_t i1, double tol,
                     std::vector<std::size_t>& keep) {
  if (i1 <= i0 + 1) return;
  const Vec2& a = pts[i0];
  const Vec2& b = pts[i1];
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  double worst = -1.0;
  std::size_t pick = i0;
  for (std::size_t i = i0 + 1; i < i1; ++i) {
    double d;
    if (len2 < 1e-18) {
      d = (pts[i] - a).norm();
    } else {
      double t = std::clamp((pts[i] - a).dot(ab) / len2, 0.0, 1.0);
      d = (pts[i] - (a + ab * t)).norm();
    }
    if (d > worst) {
      worst = d;
      pick = i;
    }
  }
  if (worst > tol) {
    douglas_peucker(pts, i0, pick, tol, keep);
    keep.push_back(pick);
    douglas_peucker(pts, pick, i1, tol, keep);
  }
}

// Simplified closed polygon: indices into pts of the kept vertices.
std::vector<std::size_t> simplify_closed(const std::vector<Vec2>& pts, double tol) {
  std::size_t n = pts.size();
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    double d = (pts[i] - pts[0]).norm2();
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<std::size_t> keep;
  keep.push_back(0);
  douglas_peucker(pts, 0, far, tol, keep);
  keep.push_back(far);
  // second chain wraps around; unroll it into an extended buffer
  std::vector<Vec2> ext(pts.begin() + far, pts.end());
  ext.insert(ext.end(), pts.begin(), pts.begin() + 1);
  std::vector<std::size_t> keep2;
  douglas_peucker(ext, 0, ext.size() - 1, tol, keep2);
  for (std::size_t k : keep2) keep.push_back((far + k) % n);
  return keep;
}

double max_chord_deviation(const std::vector<Vec2>& pts, std::size_t i0, std::size_t i1) {
  const Vec2& a = pts[i0];
  const Vec2& b = pts[i1];
  Vec2 ab = b - a;
  double len = ab.norm();
  if (len < 1e-12) return 0.0;
  Vec2 dir = ab / len;
  double worst = 0.0;
  for (std::size_t i = i0 + 1; i < i1; ++i)
    worst = std::max(worst, std::abs((pts[i] - a).cross(dir)));
  return worst;
}

// --- refinement against the slab points --------------------------------
// Traced contours run along cell edges, up to one cell outside the true
// boundary. Pure-line loops and circles are refit to the slab points.

void refine_circle_loop(Loop& loop, const std::vector<Vec2>& pts, double cell) {
  Vec2 center;
  double radius;
  circle_from_points(loop.curves[0], center, radius);
  std::vector<Vec2> ring;
  for (const Vec2& p : pts)
    if (std::abs((p - center).norm() - radius) <= 1.5 * cell) ring.push_back(p);
  if (ring.size() < 12) return;
  CircleFit fit = fit_circle(ring, 0, ring.size());
  if (fit.radius <= 0 || fit.max_residual > 2.0 * cell) return;
  loop.curves[0] = Curve::circle(fit.center, fit.radius);
}

void refine_line_loop(Loop& loop, const std::vector<Vec2>& pts, double cell) {
  std::size_t n = loop.curves.size();
  if (n < 3) return;
  struct EdgeLine {
    Vec2 point, dir;
  };
  std::vector<EdgeLine> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = loop.curves[i].points[0];
    Vec2 b = loop.curves[i].points[1];
    Vec2 dir = (b - a).normalized();
    double len = (b - a).norm();
    lines[i] = {a, dir};
    // total least squares over slab points near this segment
    std::vector<Vec2> near;
    for (const Vec2& p : pts) {
      Vec2 d = p - a;
      double t = d.dot(dir);
      if (t < -0.5 * cell || t > len + 0.5 * cell) continue;
      if (std::abs(d.cross(dir)) > 1.2 * cell) continue;
      near.push_back(p);
    }
    if (near.size() < 6) continue;
    Vec2 centroid{0, 0};
    for (const Vec2& p : near) centroid += p;
    centroid = centroid / static_cast<double>(near.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& p : near) {
      Vec2 d = p - centroid;
      sxx += d.x * d.x;
      sxy += d.x * d.y;
      syy += d.y * d.y;
    }
    // principal direction of the 2x2 scatter
    double tr = sxx + syy;
    double det = sxx * syy - sxy * sxy;
    double lambda = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    Vec2 pdir = std::abs(sxy) > 1e-15 ? Vec2{lambda - syy, sxy}.normalized()
                                      : (sxx >= syy ? Vec2{1, 0} : Vec2{0, 1});
    if (pdir.dot(dir) < 0) pdir = pdir * -1.0;
    if (std::abs(pdir.dot(dir)) < 0.9) continue;  // direction disagrees, keep the edge
    lines[i] = {centroid, pdir};
  }
  // vertices from consecutive line intersections
  std::vector<Vec2> verts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EdgeLine& l0 = lines[(i + n - 1) % n];
    const EdgeLine& l1 = lines[i];
    Vec2 original = loop.curves[i].points[0];
    double denom = l0.dir.cross(l1.dir);
    if (std::abs(denom) < 1e-6) {
      verts[i] = original;
      continue;
    }
    double t = (l1.point - l0.point).cross(l1.dir) / denom;
    Vec2 candidate = l0.point + l0.dir * t;
    verts[i] = (candidate - original).norm() <= 3.0 * cell ? candidate : original;
  }
  for (std::size_t i = 0; i < n; ++i)
    loop.curves[i] = Curve::line(verts[i], verts[(i + 1) % n]);
}

void refine_loop(Loop& loop, const std::vector<Vec2>& pts, double cell) {
  if (loop.curves.empty()) return;
  if (loop.curves.size() == 1 && loop.curves[0].kind == CurveKind::Circle) {
    refine_circle_loop(loop, pts, cell);
    return;
  }
  for (const Curve& c : loop.curves)
    if (c.kind != CurveKind::Line) return;  // mixed loops keep contour precision
  refine_line_loop(loop, pts, cell);
}

// One closed contour (plane coordinates) to a loop of curves.
Loop fit_contour(const std::vector<Vec2>& contour, double cell, double fit_tol,
                 double& max_residual) {
  Loop loop;
  CircleFit whole = fit_circle(contour, 0, contour.size());
  if (contour.size() >= 8 && whole.max_residual < fit_tol) {
    loop.curves.push_back(Curve::circle(whole.center, whole.radius));
    max_residual = std::max(max_residual, whole.max_residual / cell);
    return loop;
  }

  std::vector<std::size_t> corners = simplify_closed(contour, cell);
  if (corners.size() < 3) {
    // fall back to a triangle over extreme vertices
    corners = {0, contour.size() / 3, 2 * contour.size() / 3};
  }

  // arc substitution over runs of original contour vertices
  std::size_t m = corners.size();
  std::size_t i = 0;
  while (i < m) {
    std::size_t best_j = i;  // furthest corner reachable with one arc
    CircleFit best_fit;
    for (std::size_t j = i + 2; j < m; ++j) {
      std::size_t c0 = corners[i], c1 = corners[j];
      if (c1 <= c0) break;  // do not wrap
      if (c1 - c0 + 1 < 5) continue;
      CircleFit f = fit_circle(contour, c0, c1 + 1);
      if (f.max_residual >= fit_tol) break;
      // reject straight runs: the chord must bow out measurably
      if (max_chord_deviation(contour, c0, c1) <= fit_tol) continue;
      best_j = j;
      best_fit = f;
    }
    if (best_j > i) {
      std::size_t c0 = corners[i], c1 = corners[best_j];
      std::size_t mid = (c0 + c1) / 2;
      loop.curves.push_back(Curve::arc(contour[c0], contour[mid], contour[c1]));
      max_residual = std::max(max_residual, best_fit.max_residual / cell);
      i = best_j;
    } else {
      const Vec2& a = contour[corners[i]];
      const Vec2& b = contour[corners[(i + 1) % m]];
      if ((b - a).norm() > 1e-12) loop.curves.push_back(Curve::line(a, b));
      ++i;
    }
  }
  // close the loop back to the first vertex
  if (!loop.curves.empty()) {
    const Vec2 last_end = loop.curves.back().end();
    const Vec2 first_start = loop.curves.front().start();
    if ((last_end - first_start).norm() > 1e-12)
      loop.curves.push_back(Curve::line(last_end, first_start));
  }
  return loop;
}

}  // namespace

Sketch fit_loops(const ProfileGrid& grid, const StepFitParams& params,
                 double* max_residual_cells) {
  auto lattice_loops = trace_contours(grid);
  if (lattice_loops.empty()) throw DegenerateProfileError("profile grid has no filled region");

  struct TracedLoop {
    std::vector<Vec2> contour;  // plane coordinates
    double area = 0.0;          // signed, lattice units
    Vec2 interior;              // a point strictly inside the enclosed region
  };
  std::vector<TracedLoop> outers, holes;
  for (const auto& lp : lattice_loops) {
    TracedLoop t;
    t.area = lattice_area(lp);
    t.contour.reserve(lp.size());
    for (const LatticePoint& p : lp) t.contour.push_back(grid.lattice_to_plane(p.x, p.y));
    // half a cell to the right of the first edge lies inside a hole loop,
    // to the left inside an outer loop
    Vec2 a = t.contour[0], b = t.contour[1 % t.contour.size()];
    Vec2 dir = (b - a).normalized();
    Vec2 left = dir.perp() * (0.5 * grid.cell);
    t.interior = (a + b) * 0.5 + (t.area > 0 ? left : left * -1.0);
    if (t.area > 0)
      outers.push_back(std::move(t));
    else
      holes.push_back(std::move(t));
  }

  const double min_across = 4.0 * grid.cell;
  const double fit_tol = params.fit_tol_cells * grid.cell;

  Sketch sketch;
  double max_residual = 0.0;
  std::vector<const TracedLoop*> kept_outers;
  for (const TracedLoop& o : outers) {
    Aabb2 b;
    for (const Vec2& p : o.contour) b.expand(p);
    if (b.extent().x < min_across || b.extent().y < min_across) continue;
    Face face;
    face.outer = fit_contour(o.contour, grid.cell, fit_tol, max_residual);
    sketch.faces.push_back(std::move(face));
    kept_outers.push_back(&o);
  }
  if (sketch.faces.empty())
    throw DegenerateProfileError("every profile component is under 4 cells across");

  for (const TracedLoop& h : holes) {
    Aabb2 b;
    for (const Vec2& p : h.contour) b.expand(p);
    if (b.extent().x < 3.0 * grid.cell || b.extent().y < 3.0 * grid.cell) continue;
    // attach to the smallest containing face
    int owner = -1;
    double owner_area = 1e30;
    for (std::size_t f = 0; f < kept_outers.size(); ++f) {
      if (!point_in_polygon(h.interior, kept_outers[f]->contour)) continue;
      if (kept_outers[f]->area < owner_area) {
        owner_area = kept_outers[f]->area;
        owner = static_cast<int>(f);
      }
    }
    if (owner < 0) continue;
    sketch.faces[owner].inner.push_back(fit_contour(h.contour, grid.cell, fit_tol, max_residual));
  }
  for (Face& f : sketch.faces) {
    refine_loop(f.outer, grid.slab_points, grid.cell);
    for (Loop& l : f.inner) refine_loop(l, grid.slab_points, grid.cell);
  }
  if (max_residual_cells) *max_residual_cells = max_residual;
  return sketch;
}

ExtrusionExtent estimate_extrusion(const PlanePrompt& prompt, const PointCloud& p_ref,
                                   const ProfileGrid& grid, const StepFitParams& params) {
  std::vector<double> offsets;
  offsets.reserve(p_ref.size() / 4);
  for (const Vec3& p : p_ref.positions) {
    Vec2 q = grid.frame.project(p);
    if (grid.contains_plane_point(q)) offsets.push_back(grid.frame.height(p));
  }
  if (offsets.size() < 4) throw FlatCandidateError("no depth support inside the profile");
  std::sort(offsets.begin(), offsets.end());

  // contiguous band containing the prompt plane: start from the slab
  // values and extend while consecutive gaps stay under gap_tol
  auto lo_it = std::lower_bound(offsets.begin(), offsets.end(), -params.slab_half);
  auto hi_it = std::upper_bound(offsets.begin(), offsets.end(), params.slab_half);
  if (lo_it == hi_it) throw FlatCandidateError("no support on the prompt plane itself");
  std::size_t i0 = lo_it - offsets.begin();
  std::size_t i1 = (hi_it - offsets.begin()) - 1;
  while (i0 > 0 && offsets[i0 - 1] >= offsets[i0] - params.gap_tol) --i0;
  while (i1 + 1 < offsets.size() && offsets[i1 + 1] <= offsets[i1] + params.gap_tol) ++i1;

  std::size_t count = i1 - i0 + 1;
  auto percentile = [&](double p) {
    double idx = i0 + p * static_cast<double>(count - 1);
    return offsets[static_cast<std::size_t>(std::llround(idx))];
  };
  ExtrusionExtent extent;
  extent.d_minus = percentile(0.01);
  extent.d_plus = percentile(0.99);
  if (std::abs(extent.d_minus) < params.snap_tol) extent.d_minus = 0.0;
  if (std::abs(extent.d_plus) < params.snap_tol) extent.d_plus = 0.0;
  if (extent.d_plus - extent.d_minus < params.min_thickness)
    throw FlatCandidateError("extruded extent below minimum thickness");

  extent.depth_histogram.assign(16, 0);
  double span = offsets[i1] - offsets[i0];
  for (std::size_t i = i0; i <= i1; ++i) {
    int bin = span > 0 ? static_cast<int>((offsets[i] - offsets[i0]) / span * 15.999) : 0;
    extent.depth_histogram[bin]++;
  }
  return extent;
}

BooleanOp choose_boolean(const Sketch& sketch, const Extrusion& extrusion, const Solid& state,
                         const PointCloud& p_full, const KdTree3& p_full_tree,
                         std::uint64_t seed, int samples) {
  if (state.empty()) return BooleanOp::Union;

  auto score_flag = [&](BooleanOp op) {
    Solid trial = state;
    trial.add_step(sketch, extrusion, op);
    try {
      PointCloud sample = trial.sample_surface(samples, seed);
      return chamfer(sample, p_full, p_full_tree);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double union_score = score_flag(BooleanOp::Union);
  double sub_score = score_flag(BooleanOp::Subtraction);
  if (std::isinf(union_score) && std::isinf(sub_score))
    throw InvalidCandidateError("candidate does not execute under either flag");
  return sub_score < union_score ? BooleanOp::Subtraction : BooleanOp::Union;
}

nlohmann::json CandidateDiagnostics::to_json() const {
  return {{"grid_nx", grid_nx},
          {"grid_ny", grid_ny},
          {"cell", cell},
          {"max_loop_residual_cells", max_loop_residual},
          {"depth_histogram", depth_histogram}};
}

ModelingStep make_step(const PlaneFrame& frame, const Sketch& sketch_in_plane, double d_minus,
                       double d_plus, BooleanOp op) {
  Aabb2 bounds;
  for (const Face& f : sketch_in_plane.faces) {
    auto expand = [&](const Loop& l) {
      for (const Curve& c : l.curves)
        for (const Vec2& p : c.points) bounds.expand(p);
    };
    expand(f.outer);
    for (const Loop& l : f.inner) expand(l);
  }
  if (bounds.empty()) throw DegenerateProfileError("sketch has no control points");
  double extent = std::max(bounds.extent().x, bounds.extent().y);
  if (extent <= 0) throw DegenerateProfileError("sketch has zero extent");

  ModelingStep step;
  step.op = op;
  auto normalize_pt = [&](const Vec2& p) { return (p - bounds.lo) / extent; };
  for (const Face& f : sketch_in_plane.faces) {
    Face nf;
    auto normalize_loop = [&](const Loop& l) {
      Loop nl;
      for (const Curve& c : l.curves) {
        Curve nc;
        nc.kind = c.kind;
        for (const Vec2& p : c.points) nc.points.push_back(normalize_pt(p));
        nl.curves.push_back(std::move(nc));
      }
      return nl;
    };
    nf.outer = normalize_loop(f.outer);
    for (const Loop& l : f.inner) nf.inner.push_back(normalize_loop(l));
    step.sketch.faces.push_back(std::move(nf));
  }

  Extrusion& e = step.extrusion;
  e.scale = extent;
  e.d_minus = d_minus;
  e.d_plus = d_plus;
  e.translation = frame.origin + frame.u * bounds.lo.x + frame.v * bounds.lo.y;
  euler_from_rotation(frame.rotation(), e.theta, e.phi, e.rho);
  return step;
}

std::optional<CandidateStep> reconstruct_step(const PlanePrompt& prompt, const RefCloud& p_ref,
                                              const PointCloud& p_full,
                                              const KdTree3& p_full_tree, const Solid& state,
                                              const StepFitParams& params, std::uint64_t seed) {
  try {
    ProfileGrid grid = extract_profile(prompt, p_ref.cloud, params);
    double loop_residual = 0.0;
    Sketch plane_sketch = fit_loops(grid, params, &loop_residual);
    ExtrusionExtent extent = estimate_extrusion(prompt, p_ref.cloud, grid, params);

    ModelingStep step = make_step(grid.frame, plane_sketch, extent.d_minus, extent.d_plus,
                                  BooleanOp::Union);
    step.op = choose_boolean(step.sketch, step.extrusion, state, p_full, p_full_tree, seed);

    // structural sanity; op checked as if this were a first step
    ModelingStep as_first = step;
    as_first.op = BooleanOp::Union;
    CadSequence single;
    single.steps.push_back(as_first);
    if (!validate(single).empty()) return std::nullopt;

    CandidateStep candidate;
    candidate.step = std::move(step);
    candidate.prompt = prompt;
    candidate.diag.grid_nx = grid.nx;
    candidate.diag.grid_ny = grid.ny;
    candidate.diag.cell = grid.cell;
    candidate.diag.depth_histogram = extent.depth_histogram;
    candidate.diag.max_loop_residual = loop_residual;
    return candidate;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace cadrec
