#include "cadrec/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "cadrec/errors.hpp"
#include "cadrec/rng.hpp"
#include "cadrec/solid.hpp"
#include "cadrec/stepfit.hpp"

namespace cadrec {

Sketch rect_sketch(const Vec2& lo, const Vec2& hi) {
  Sketch s;
  Face f;
  f.outer.curves = {Curve::line({lo.x, lo.y}, {hi.x, lo.y}),
                    Curve::line({hi.x, lo.y}, {hi.x, hi.y}),
                    Curve::line({hi.x, hi.y}, {lo.x, hi.y}),
                    Curve::line({lo.x, hi.y}, {lo.x, lo.y})};
  s.faces.push_back(std::move(f));
  return s;
}

Sketch circle_sketch(const Vec2& center, double radius) {
  Sketch s;
  Face f;
  f.outer.curves = {Curve::circle(center, radius)};
  s.faces.push_back(std::move(f));
  return s;
}

Sketch rect_with_hole_sketch(const Vec2& lo, const Vec2& hi, double hole_radius) {
  Sketch s = rect_sketch(lo, hi);
  Loop hole;
  hole.curves = {Curve::circle((lo + hi) * 0.5, hole_radius)};
  s.faces[0].inner.push_back(std::move(hole));
  return s;
}

Sketch rounded_rect_sketch(const Vec2& lo, const Vec2& hi, double corner_radius) {
  // one rounded corner (top-right), the rest square
  double r = corner_radius;
  Vec2 c{hi.x - r, hi.y - r};
  double s45 = r * std::sqrt(0.5);
  Sketch s;
  Face f;
  f.outer.curves = {Curve::line({lo.x, lo.y}, {hi.x, lo.y}),
                    Curve::line({hi.x, lo.y}, {hi.x, c.y}),
                    Curve::arc({hi.x, c.y}, {c.x + s45, c.y + s45}, {c.x, hi.y}),
                    Curve::line({c.x, hi.y}, {lo.x, hi.y}),
                    Curve::line({lo.x, hi.y}, {lo.x, lo.y})};
  s.faces.push_back(std::move(f));
  return s;
}

namespace {

// axis-aligned planes only, so world clamping stays simple
struct AxisFrame {
  PlaneFrame frame;
  int normal_axis;  // 0, 1, 2
  int sign;         // +1 / -1
};

// Plane through world coordinate `coord` along `axis`, normal sign*axis.
AxisFrame make_axis_frame(int axis, int sign, double coord) {
  Plane plane;
  plane.normal = {axis == 0 ? static_cast<double>(sign) : 0.0,
                  axis == 1 ? static_cast<double>(sign) : 0.0,
                  axis == 2 ? static_cast<double>(sign) : 0.0};
  plane.offset = sign * coord;
  AxisFrame af;
  af.frame = plane_frame(plane);
  af.normal_axis = axis;
  af.sign = sign;
  return af;
}

// allowed in-plane interval so world geometry stays inside [margin, 1-margin]^3
void plane_limits(const PlaneFrame& frame, double margin, Vec2& lo, Vec2& hi) {
  auto axis_interval = [&](const Vec3& dir, double& a, double& b) {
    // project the world box [margin, 1-margin]^3 onto dir relative to origin
    double base = frame.origin.dot(dir);
    a = -base;
    b = -base;
    double acc_lo = 0.0, acc_hi = 0.0;
    const double comp[3] = {dir.x, dir.y, dir.z};
    for (double c : comp) {
      if (c > 0) {
        acc_lo += c * margin;
        acc_hi += c * (1.0 - margin);
      } else {
        acc_lo += c * (1.0 - margin);
        acc_hi += c * margin;
      }
    }
    a += acc_lo;
    b += acc_hi;
  };
  axis_interval(frame.u, lo.x, hi.x);
  axis_interval(frame.v, lo.y, hi.y);
}

// in-plane interval covered by the hull
void footprint_limits(const PlaneFrame& frame, const Aabb3& hull, Vec2& lo, Vec2& hi) {
  auto axis_interval = [&](const Vec3& dir, double& a, double& b) {
    double base = frame.origin.dot(dir);
    a = -base;
    b = -base;
    const double comp[3] = {dir.x, dir.y, dir.z};
    const double blo[3] = {hull.lo.x, hull.lo.y, hull.lo.z};
    const double bhi[3] = {hull.hi.x, hull.hi.y, hull.hi.z};
    for (int i = 0; i < 3; ++i) {
      if (comp[i] > 0) {
        a += comp[i] * blo[i];
        b += comp[i] * bhi[i];
      } else {
        a += comp[i] * bhi[i];
        b += comp[i] * blo[i];
      }
    }
  };
  axis_interval(frame.u, lo.x, hi.x);
  axis_interval(frame.v, lo.y, hi.y);
}

struct ProbeSet {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> occ;
};

int count_occupied(const Solid& solid, const std::vector<Vec3>& pts,
                   std::vector<std::uint8_t>& occ) {
  occ.resize(pts.size());
  int n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    occ[i] = solid.occupied(pts[i]) ? 1 : 0;
    n += occ[i];
  }
  return n;
}

}  // namespace

SyntheticModel generate_synthetic(std::uint64_t seed, int steps, int n_points) {
  if (steps < 1) throw DegenerateInputError("steps must be >= 1");

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng rng(derive_seed(seed, 1000 + attempt));

    ProbeSet probes;
    probes.points.reserve(4096);
    for (int i = 0; i < 4096; ++i)
      probes.points.push_back({rng.uniform(), rng.uniform(), rng.uniform()});

    CadSequence seq;
    Solid solid;
    std::vector<std::uint8_t> prev_occ;
    int prev_count = 0;
    bool failed = false;

    for (int t = 0; t < steps && !failed; ++t) {
      bool placed = false;
      for (int retry = 0; retry < 24 && !placed; ++retry) {
        ModelingStep step;
        if (t == 0) {
          int axis = rng.uniform_int(0, 2);
          AxisFrame af = make_axis_frame(axis, 1, rng.uniform(0.2, 0.45));
          Vec2 lo, hi;
          plane_limits(af.frame, 0.05, lo, hi);
          double w = rng.uniform(0.5, 0.8);
          double h = rng.uniform(0.5, 0.8);
          Vec2 p0{rng.uniform(lo.x, hi.x - w), rng.uniform(lo.y, hi.y - h)};
          Sketch sketch;
          int shape = rng.uniform_int(0, 9);
          if (shape < 4) {
            sketch = rect_sketch(p0, p0 + Vec2{w, h});
          } else if (shape < 7) {
            double r = std::min(w, h) * 0.5;
            sketch = circle_sketch(p0 + Vec2{r, r}, r);
          } else if (shape < 9) {
            sketch = rect_with_hole_sketch(p0, p0 + Vec2{w, h},
                                           rng.uniform(0.12, std::min(w, h) * 0.35));
          } else {
            sketch = rounded_rect_sketch(p0, p0 + Vec2{w, h},
                                         rng.uniform(0.1, std::min(w, h) * 0.3));
          }
          double thickness = rng.uniform(0.2, 0.45);
          step = make_step(af.frame, sketch, 0.0, thickness, BooleanOp::Union);
        } else {
          // anchor the feature on the current solid's bounding box
          Aabb3 hull = solid.approx_bounds();
          int axis = rng.uniform_int(0, 2);
          int sign = rng.bernoulli(0.5) ? 1 : -1;
          double face = sign > 0 ? hull.hi[axis] : hull.lo[axis];
          AxisFrame af = make_axis_frame(axis, sign, face);
          Vec2 lo, hi;
          plane_limits(af.frame, 0.05, lo, hi);
          // stay over the existing footprint so features attach / cut
          Vec2 flo, fhi;
          footprint_limits(af.frame, hull, flo, fhi);
          lo.x = std::max(lo.x, flo.x + 0.02);
          lo.y = std::max(lo.y, flo.y + 0.02);
          hi.x = std::min(hi.x, fhi.x - 0.02);
          hi.y = std::min(hi.y, fhi.y - 0.02);
          BooleanOp op = rng.bernoulli(0.45) ? BooleanOp::Subtraction : BooleanOp::Union;

          double fw = rng.uniform(0.3, 0.48);
          double fh = rng.uniform(0.3, 0.48);
          if (hi.x - lo.x < fw + 0.01 || hi.y - lo.y < fh + 0.01) continue;
          Vec2 p0{rng.uniform(lo.x, hi.x - fw), rng.uniform(lo.y, hi.y - fh)};
          Sketch sketch;
          if (rng.bernoulli(0.5)) {
            sketch = rect_sketch(p0, p0 + Vec2{fw, fh});
          } else {
            double r = std::min(fw, fh) * 0.5;
            sketch = circle_sketch(p0 + Vec2{r, r}, r);
          }
          double d_minus, d_plus;
          if (op == BooleanOp::Union) {
            // grow outward, slightly embedded so the pieces fuse; stay
            // inside the unit box
            double budget = sign > 0 ? 0.98 - face : face - 0.02;
            if (budget < 0.12) continue;
            d_minus = -0.04;
            d_plus = rng.uniform(0.12, std::min(0.3, budget));
          } else {
            // pocket into the solid, cleared slightly above the face
            d_minus = -rng.uniform(0.1, 0.3);
            d_plus = 0.04;
          }
          step = make_step(af.frame, sketch, d_minus, d_plus, op);
        }

        Solid trial = solid;
        trial.add_step(step.sketch, step.extrusion, step.op);
        std::vector<std::uint8_t> occ;
        int occupied = count_occupied(trial, probes.points, occ);
        if (occupied < 40) continue;  // empty or sliver
        if (t > 0) {
          int changed = 0;
          for (std::size_t i = 0; i < occ.size(); ++i) changed += occ[i] != prev_occ[i];
          if (changed < 20) continue;  // step effectively invisible
          // subtraction must not hollow out almost everything
          if (step.op == BooleanOp::Subtraction && occupied < prev_count / 4) continue;
        }
        seq.steps.push_back(step);
        solid = std::move(trial);
        prev_occ = std::move(occ);
        prev_count = occupied;
        placed = true;
      }
      failed = !placed;
    }
    if (failed) continue;

    try {
      SyntheticModel model;
      model.seq = std::move(seq);
      model.cloud = solid.sample_surface(n_points, derive_seed(seed, 7));
      return model;
    } catch (const Error&) {
      continue;  // sampling failed, regenerate
    }
  }
  throw DegenerateInputError("synthetic generator failed to produce a valid model");
}

}  // namespace cadrec
