#pragma once

// Sketch-extrude modeling language: data model, 64-bin token alphabet,
// quantization, (de)tokenization and structural validation.
//
// A modeling step is a 2D sketch (faces of closed loops made of lines,
// arcs and circles), an extrusion placing that sketch in space and
// sweeping it between two offsets along the sketch-plane normal, and a
// boolean flag combining the swept solid with the running state.

#include <string>
#include <vector>

#include "cadrec/errors.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

enum class CurveKind { Line, Arc, Circle };

// Line: 2 points (start, end).
// Arc: 3 points (start, mid, end) on the circumcircle.
// Circle: 4 points forming two orthogonal diameters, (p0,p2) and (p1,p3).
struct Curve {
  CurveKind kind = CurveKind::Line;
  std::vector<Vec2> points;

  static Curve line(const Vec2& a, const Vec2& b) { return {CurveKind::Line, {a, b}}; }
  static Curve arc(const Vec2& start, const Vec2& mid, const Vec2& end) {
    return {CurveKind::Arc, {start, mid, end}};
  }
  static Curve circle(const Vec2& center, double radius) {
    return {CurveKind::Circle,
            {{center.x, center.y + radius},
             {center.x + radius, center.y},
             {center.x, center.y - radius},
             {center.x - radius, center.y}}};
  }

  const Vec2& start() const { return points.front(); }
  // chaining endpoint; circles close on themselves
  const Vec2& end() const {
    return kind == CurveKind::Arc ? points[2] : points.back();
  }
};

struct Loop {
  std::vector<Curve> curves;
};

struct Face {
  Loop outer;
  std::vector<Loop> inner;
};

struct Sketch {
  std::vector<Face> faces;
};

enum class BooleanOp { Subtraction = 0, Union = 1 };

// Places a sketch in space: scale by `scale`, rotate by the x-y-z Euler
// angles, translate; the solid spans local z in [d_minus, d_plus].
// The scale applies to the sketch only, never to the extruded offsets.
struct Extrusion {
  double d_plus = 1.0;
  double d_minus = 0.0;
  Vec3 translation{0, 0, 0};
  double theta = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  double scale = 1.0;

  Mat3 rotation() const { return rotation_xyz(theta, phi, rho); }
  Vec3 normal() const { return rotation() * Vec3{0, 0, 1}; }
  double thickness() const { return d_plus - d_minus; }
};

struct ModelingStep {
  Sketch sketch;
  Extrusion extrusion;
  BooleanOp op = BooleanOp::Union;
};

struct CadSequence {
  std::vector<ModelingStep> steps;

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  // prefix O_T: the first `count` steps
  CadSequence prefix(std::size_t count) const {
    CadSequence p;
    p.steps.assign(steps.begin(), steps.begin() + std::min(count, steps.size()));
    return p;
  }
};

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

// Token layout per step:
//   sketch block   coordinate tokens in [5, 68], each curve closed by
//                  end-of-curve (4), loop by end-of-loop (3), face by
//                  end-of-face (2), sketch by end-of-sketch (1)
//   extrude block  nine parameter tokens in [2, 65] in the order
//                  d+, d-, tx, ty, tz, theta, phi, rho, scale,
//                  closed by end-of-extrude (1)
//   boolean token  1 = union, 0 = subtraction
// Steps are concatenated; there is no global terminator.
struct TokenAlphabet {
  int bins = 64;

  static constexpr int kEndSketch = 1;
  static constexpr int kEndFace = 2;
  static constexpr int kEndLoop = 3;
  static constexpr int kEndCurve = 4;
  static constexpr int kCoordBase = 5;  // sketch coordinate bin 0

  static constexpr int kEndExtrude = 1;
  static constexpr int kExtrudeBase = 2;  // extrusion parameter bin 0

  ParamRange coord{0.0, 1.0};
  ParamRange distance{-1.0, 1.0};     // d+ and d-
  ParamRange translation{-1.0, 1.0};  // each component
  ParamRange angle{-kPi, kPi};
  ParamRange scale{0.0, 2.0};

  int coord_max() const { return kCoordBase + bins - 1; }       // 68
  int extrude_max() const { return kExtrudeBase + bins - 1; }   // 65

  static TokenAlphabet standard() { return {}; }
};

using TokenStream = std::vector<int>;

// bin = floor((v - lo) / (hi - lo) * q), clamped to [0, q-1].
int quantize(double v, const ParamRange& range, int q);

// value = lo + bin * (hi - lo) / q; round-trip error < (hi - lo) / q.
double dequantize(int bin, const ParamRange& range, int q);

TokenStream tokenize(const CadSequence& seq, const TokenAlphabet& alphabet);
TokenStream tokenize_step(const ModelingStep& step, const TokenAlphabet& alphabet);

// Structural inverse of tokenize. Throws ParseError with the offending
// token index; the result is not validated (see validate()).
CadSequence parse(const TokenStream& stream, const TokenAlphabet& alphabet);

struct Violation {
  std::string where;    // e.g. "step 1 / face 0 / loop 2"
  std::string message;
};

// Empty result iff all structural invariants hold. Never throws.
std::vector<Violation> validate(const CadSequence& seq);
inline bool is_valid(const CadSequence& seq) { return validate(seq).empty(); }

// Tolerances used by validate (sketch-local units).
struct ValidateTolerances {
  double loop_closure = 1.5 / 64.0;   // 1.5 quantization bins
  double circle_radius = 2.5 / 64.0;  // radius spread across the 4 points
  double circle_ortho = 0.25;         // |cos| between the two diameters
  double arc_collinear = 1e-9;        // relative triangle area threshold
};
std::vector<Violation> validate(const CadSequence& seq, const ValidateTolerances& tol);

}  // namespace cadrec
