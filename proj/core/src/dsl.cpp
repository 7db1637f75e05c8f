#include "cadrec/dsl.hpp"

#include <cmath>
#include <cstdio>

#include "cadrec/sketch2d.hpp"

namespace cadrec {

int quantize(double v, const ParamRange& range, int q) {
  if (q < 1) throw ValueRangeError("bin count must be >= 1");
  if (!(v >= range.lo && v <= range.hi)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "value %.9g outside [%.9g, %.9g]", v, range.lo, range.hi);
    throw ValueRangeError(buf);
  }
  int bin = static_cast<int>(std::floor((v - range.lo) / range.width() * q));
  if (bin < 0) bin = 0;
  if (bin > q - 1) bin = q - 1;  // v == hi lands here
  return bin;
}

double dequantize(int bin, const ParamRange& range, int q) {
  if (bin < 0 || bin >= q) throw ValueRangeError("bin outside [0, Q)");
  return range.lo + bin * range.width() / q;
}

namespace {

int expected_point_count(CurveKind kind) {
  switch (kind) {
    case CurveKind::Line: return 2;
    case CurveKind::Arc: return 3;
    case CurveKind::Circle: return 4;
  }
  return 0;
}

void emit_coord(TokenStream& out, double v, const TokenAlphabet& a, const char* name) {
  try {
    out.push_back(TokenAlphabet::kCoordBase + quantize(v, a.coord, a.bins));
  } catch (const ValueRangeError& e) {
    throw ValueRangeError(std::string(name) + ": " + e.what());
  }
}

void emit_extrude(TokenStream& out, double v, const ParamRange& r, const TokenAlphabet& a,
                  const char* name) {
  try {
    out.push_back(TokenAlphabet::kExtrudeBase + quantize(v, r, a.bins));
  } catch (const ValueRangeError& e) {
    throw ValueRangeError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

TokenStream tokenize_step(const ModelingStep& step, const TokenAlphabet& a) {
  TokenStream out;
  for (const Face& face : step.sketch.faces) {
    auto emit_loop = [&](const Loop& loop) {
      for (const Curve& c : loop.curves) {
        for (const Vec2& p : c.points) {
          emit_coord(out, p.x, a, "curve x");
          emit_coord(out, p.y, a, "curve y");
        }
        out.push_back(TokenAlphabet::kEndCurve);
      }
      out.push_back(TokenAlphabet::kEndLoop);
    };
    emit_loop(face.outer);
    for (const Loop& l : face.inner) emit_loop(l);
    out.push_back(TokenAlphabet::kEndFace);
  }
  out.push_back(TokenAlphabet::kEndSketch);

  const Extrusion& e = step.extrusion;
  emit_extrude(out, e.d_plus, a.distance, a, "d_plus");
  emit_extrude(out, e.d_minus, a.distance, a, "d_minus");
  emit_extrude(out, e.translation.x, a.translation, a, "tau_x");
  emit_extrude(out, e.translation.y, a.translation, a, "tau_y");
  emit_extrude(out, e.translation.z, a.translation, a, "tau_z");
  emit_extrude(out, wrap_angle(e.theta), a.angle, a, "theta");
  emit_extrude(out, wrap_angle(e.phi), a.angle, a, "phi");
  emit_extrude(out, wrap_angle(e.rho), a.angle, a, "rho");
  emit_extrude(out, e.scale, a.scale, a, "scale");
  out.push_back(TokenAlphabet::kEndExtrude);

  out.push_back(step.op == BooleanOp::Union ? 1 : 0);
  return out;
}

TokenStream tokenize(const CadSequence& seq, const TokenAlphabet& a) {
  if (seq.empty()) throw ValueRangeError("cannot tokenize an empty sequence");
  TokenStream out;
  for (const ModelingStep& step : seq.steps) {
    TokenStream s = tokenize_step(step, a);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

namespace {

// Cursor over the token stream; all errors carry the current index.
struct TokenCursor {
  const TokenStream& stream;
  std::size_t pos = 0;

  bool done() const { return pos >= stream.size(); }
  int peek() const {
    if (done()) throw ParseError(stream.size(), "unexpected end of stream");
    return stream[pos];
  }
  int take() {
    int t = peek();
    ++pos;
    return t;
  }
};

Sketch parse_sketch(TokenCursor& cur, const TokenAlphabet& a) {
  Sketch sketch;
  while (true) {
    if (cur.peek() == TokenAlphabet::kEndSketch) {
      cur.take();
      if (sketch.faces.empty()) throw ParseError(cur.pos - 1, "sketch with no faces");
      return sketch;
    }
    Face face;
    bool first_loop = true;
    while (true) {
      if (cur.peek() == TokenAlphabet::kEndFace) {
        cur.take();
        if (first_loop) throw ParseError(cur.pos - 1, "face with no loops");
        break;
      }
      Loop loop;
      while (true) {
        if (cur.peek() == TokenAlphabet::kEndLoop) {
          cur.take();
          if (loop.curves.empty()) throw ParseError(cur.pos - 1, "loop with no curves");
          break;
        }
        // read 2D points until the end-of-curve token
        std::vector<Vec2> pts;
        while (cur.peek() != TokenAlphabet::kEndCurve) {
          int tx = cur.take();
          if (tx < TokenAlphabet::kCoordBase || tx > a.coord_max())
            throw ParseError(cur.pos - 1, "expected coordinate token");
          int ty = cur.take();
          if (ty < TokenAlphabet::kCoordBase || ty > a.coord_max())
            throw ParseError(cur.pos - 1, "expected coordinate token");
          pts.push_back({dequantize(tx - TokenAlphabet::kCoordBase, a.coord, a.bins),
                         dequantize(ty - TokenAlphabet::kCoordBase, a.coord, a.bins)});
          if (pts.size() > 4) throw ParseError(cur.pos, "curve with more than 4 points");
        }
        cur.take();  // end-of-curve
        Curve c;
        switch (pts.size()) {
          case 2: c.kind = CurveKind::Line; break;
          case 3: c.kind = CurveKind::Arc; break;
          case 4: c.kind = CurveKind::Circle; break;
          default:
            throw ParseError(cur.pos - 1, "curve with invalid point count");
        }
        c.points = std::move(pts);
        loop.curves.push_back(std::move(c));
      }
      if (first_loop) {
        face.outer = std::move(loop);
        first_loop = false;
      } else {
        face.inner.push_back(std::move(loop));
      }
    }
    sketch.faces.push_back(std::move(face));
  }
}

Extrusion parse_extrusion(TokenCursor& cur, const TokenAlphabet& a) {
  auto take_param = [&](const ParamRange& r, const char* name) {
    int t = cur.take();
    if (t < TokenAlphabet::kExtrudeBase || t > a.extrude_max())
      throw ParseError(cur.pos - 1, std::string("expected ") + name + " parameter token");
    return dequantize(t - TokenAlphabet::kExtrudeBase, r, a.bins);
  };
  Extrusion e;
  e.d_plus = take_param(a.distance, "d_plus");
  e.d_minus = take_param(a.distance, "d_minus");
  e.translation.x = take_param(a.translation, "tau_x");
  e.translation.y = take_param(a.translation, "tau_y");
  e.translation.z = take_param(a.translation, "tau_z");
  e.theta = take_param(a.angle, "theta");
  e.phi = take_param(a.angle, "phi");
  e.rho = take_param(a.angle, "rho");
  e.scale = take_param(a.scale, "scale");
  if (cur.take() != TokenAlphabet::kEndExtrude)
    throw ParseError(cur.pos - 1, "expected end-of-extrude token");
  return e;
}

}  // namespace

CadSequence parse(const TokenStream& stream, const TokenAlphabet& a) {
  TokenCursor cur{stream};
  CadSequence seq;
  if (cur.done()) throw ParseError(0, "empty token stream");
  while (!cur.done()) {
    ModelingStep step;
    step.sketch = parse_sketch(cur, a);
    step.extrusion = parse_extrusion(cur, a);
    int flag = cur.take();
    if (flag != 0 && flag != 1) throw ParseError(cur.pos - 1, "boolean token must be 0 or 1");
    step.op = flag == 1 ? BooleanOp::Union : BooleanOp::Subtraction;
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

namespace {

struct Checker {
  const ValidateTolerances& tol;
  std::vector<Violation> out;

  void add(std::string where, std::string message) {
    out.push_back({std::move(where), std::move(message)});
  }

  bool check_curve(const Curve& c, const std::string& where) {
    int want = expected_point_count(c.kind);
    if (static_cast<int>(c.points.size()) != want) {
      add(where, "curve has " + std::to_string(c.points.size()) + " points, expected " +
                     std::to_string(want));
      return false;
    }
    if (c.kind == CurveKind::Arc) {
      Vec2 center;
      double radius;
      if (!circumcircle(c.points[0], c.points[1], c.points[2], center, radius)) {
        add(where, "arc points are collinear");
        return false;
      }
    }
    if (c.kind == CurveKind::Circle) {
      Vec2 c1 = (c.points[0] + c.points[2]) * 0.5;
      Vec2 c2 = (c.points[1] + c.points[3]) * 0.5;
      Vec2 d1 = c.points[0] - c.points[2];
      Vec2 d2 = c.points[1] - c.points[3];
      if (d1.norm() <= 0 || d2.norm() <= 0) {
        add(where, "circle with coincident diameter points");
        return false;
      }
      Vec2 center = (c1 + c2) * 0.5;
      double r = 0.0;
      for (const Vec2& p : c.points) r += (p - center).norm();
      r /= 4.0;
      for (const Vec2& p : c.points)
        if (std::abs((p - center).norm() - r) > tol.circle_radius) {
          add(where, "circle points do not lie on a common circle");
          return false;
        }
      if (std::abs(d1.normalized().dot(d2.normalized())) > tol.circle_ortho) {
        add(where, "circle diameters are not orthogonal");
        return false;
      }
    }
    return true;
  }

  bool check_loop(const Loop& loop, const std::string& where) {
    if (loop.curves.empty()) {
      add(where, "loop has no curves");
      return false;
    }
    bool curves_ok = true;
    for (std::size_t i = 0; i < loop.curves.size(); ++i)
      curves_ok &= check_curve(loop.curves[i], where + " / curve " + std::to_string(i));
    if (!curves_ok) return false;

    bool has_circle = false;
    for (const Curve& c : loop.curves) has_circle |= c.kind == CurveKind::Circle;
    if (has_circle) {
      if (loop.curves.size() != 1) {
        add(where, "circle must be the only curve in its loop");
        return false;
      }
      return true;
    }
    // chained curves must close
    for (std::size_t i = 0; i < loop.curves.size(); ++i) {
      const Vec2& e = loop.curves[i].end();
      const Vec2& s = loop.curves[(i + 1) % loop.curves.size()].start();
      if ((e - s).norm() > tol.loop_closure) {
        add(where, "loop does not close at curve " + std::to_string(i));
        return false;
      }
    }
    if (loop.curves.size() == 1 && loop.curves[0].kind == CurveKind::Line) {
      add(where, "single line segment cannot form a closed loop");
      return false;
    }
    return true;
  }

  void check_face(const Face& face, const std::string& where) {
    bool outer_ok = check_loop(face.outer, where + " / outer loop");
    std::vector<std::vector<Vec2>> polys;
    std::vector<Vec2> outer_poly;
    if (outer_ok) {
      try {
        outer_poly = discretize_loop_for_checks(face.outer);
      } catch (const Error&) {
        outer_ok = false;
      }
    }
    for (std::size_t i = 0; i < face.inner.size(); ++i) {
      std::string lw = where + " / inner loop " + std::to_string(i);
      if (!check_loop(face.inner[i], lw)) continue;
      std::vector<Vec2> poly;
      try {
        poly = discretize_loop_for_checks(face.inner[i]);
      } catch (const Error&) {
        continue;
      }
      if (outer_ok) {
        bool all_inside = true;
        for (const Vec2& p : poly)
          if (!point_in_polygon(p, outer_poly)) {
            all_inside = false;
            break;
          }
        if (!all_inside) add(lw, "inner loop not strictly inside the outer loop");
        if (polygons_intersect(poly, outer_poly)) add(lw, "inner loop crosses the outer loop");
      }
      for (std::size_t j = 0; j < polys.size(); ++j)
        if (polygons_intersect(poly, polys[j]))
          add(lw, "inner loop crosses inner loop " + std::to_string(j));
      polys.push_back(std::move(poly));
    }
  }

  static std::vector<Vec2> discretize_loop_for_checks(const Loop& loop) {
    Sketch s;
    s.faces.push_back({loop, {}});
    return discretize_sketch(s, kDefaultChordTol).faces[0].outer;
  }

  void check_step(const ModelingStep& step, std::size_t index) {
    std::string where = "step " + std::to_string(index);
    if (step.sketch.faces.empty()) add(where, "sketch has no faces");
    for (std::size_t f = 0; f < step.sketch.faces.size(); ++f)
      check_face(step.sketch.faces[f], where + " / face " + std::to_string(f));

    const Extrusion& e = step.extrusion;
    if (!(e.thickness() > 0)) add(where, "extrusion thickness d_plus - d_minus must be > 0");
    if (!(e.scale > 0)) add(where, "extrusion scale must be > 0");
    auto in_range = [](double a) { return a >= -kPi && a < kPi; };
    if (!in_range(e.theta) || !in_range(e.phi) || !in_range(e.rho))
      add(where, "euler angles must lie in [-pi, pi)");
  }
};

}  // namespace

std::vector<Violation> validate(const CadSequence& seq, const ValidateTolerances& tol) {
  Checker checker{tol, {}};
  if (seq.empty()) {
    checker.add("sequence", "no modeling steps");
    return checker.out;
  }
  if (seq.steps[0].op != BooleanOp::Union)
    checker.add("step 0", "first step must be a union (cannot subtract from empty space)");
  for (std::size_t i = 0; i < seq.steps.size(); ++i) checker.check_step(seq.steps[i], i);
  return checker.out;
}

std::vector<Violation> validate(const CadSequence& seq) {
  return validate(seq, ValidateTolerances{});
}

}  // namespace cadrec
