#include "cadrec/losses.hpp"

#include <cmath>

#include "cadrec/errors.hpp"

namespace cadrec {

namespace {

// Forward-mode dual number carrying derivatives w.r.t. N parameters.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constants
  static Dual seed(double value, int index) {
    Dual r(value);
    r.d[index] = 1.0;
    return r;
  }

  Dual operator-() const {
    Dual r(-v);
    for (int i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }
  Dual operator+(const Dual& o) const {
    Dual r(v + o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] + o.d[i];
    return r;
  }
  Dual operator-(const Dual& o) const {
    Dual r(v - o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] - o.d[i];
    return r;
  }
  Dual operator*(const Dual& o) const {
    Dual r(v * o.v);
    for (int i = 0; i < N; ++i) r.d[i] = d[i] * o.v + v * o.d[i];
    return r;
  }
  Dual operator/(const Dual& o) const {
    Dual r(v / o.v);
    for (int i = 0; i < N; ++i) r.d[i] = (d[i] * o.v - v * o.d[i]) / (o.v * o.v);
    return r;
  }
};

template <int N>
Dual<N> sin(const Dual<N>& a) {
  Dual<N> r(std::sin(a.v));
  double c = std::cos(a.v);
  for (int i = 0; i < N; ++i) r.d[i] = c * a.d[i];
  return r;
}
template <int N>
Dual<N> cos(const Dual<N>& a) {
  Dual<N> r(std::cos(a.v));
  double s = -std::sin(a.v);
  for (int i = 0; i < N; ++i) r.d[i] = s * a.d[i];
  return r;
}
template <int N>
Dual<N> log(const Dual<N>& a) {
  Dual<N> r(std::log(a.v));
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] / a.v;
  return r;
}
template <int N>
Dual<N> exp(const Dual<N>& a) {
  Dual<N> r(std::exp(a.v));
  for (int i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
  return r;
}
template <int N>
Dual<N> max(const Dual<N>& a, const Dual<N>& b) {
  return a.v >= b.v ? a : b;
}
template <int N>
Dual<N> min(const Dual<N>& a, const Dual<N>& b) {
  return a.v <= b.v ? a : b;
}

using std::cos;
using std::exp;
using std::log;
using std::max;
using std::min;
using std::sin;

template <class T>
T value_of(const T& x) { return x; }
template <int N>
double value_of(const Dual<N>& x) { return x.v; }

// R_z(rho) * R_y(phi) * R_x(theta) applied to (x, y, z); matches
// rotation_xyz() on the double path.
template <class T>
std::array<T, 3> rotate_xyz(const T& theta, const T& phi, const T& rho, const T& x, const T& y,
                            const T& z) {
  T ct = cos(theta), st = sin(theta);
  T cp = cos(phi), sp = sin(phi);
  T cr = cos(rho), sr = sin(rho);
  T rx = cr * cp * x + (cr * sp * st - sr * ct) * y + (sr * st + cr * sp * ct) * z;
  T ry = sr * cp * x + (cr * ct + sr * sp * st) * y + (sr * sp * ct - cr * st) * z;
  T rz = -sp * x + cp * st * y + cp * ct * z;
  return {rx, ry, rz};
}

template <class T>
struct ParamsT {
  T min_x, min_y, max_x, max_y, d_minus, d_plus, tau_x, tau_y, tau_z, theta, phi, rho, scale;
};

ParamsT<double> lift(const SoftParams& p) {
  return {p.sketch_min.x, p.sketch_min.y, p.sketch_max.x, p.sketch_max.y, p.d_minus,
          p.d_plus,       p.translation.x, p.translation.y, p.translation.z, p.theta,
          p.phi,          p.rho,           p.scale};
}

constexpr int kN = SoftParams::kCount;

ParamsT<Dual<kN>> lift_dual(const SoftParams& p) {
  ParamsT<Dual<kN>> q;
  q.min_x = Dual<kN>::seed(p.sketch_min.x, 0);
  q.min_y = Dual<kN>::seed(p.sketch_min.y, 1);
  q.max_x = Dual<kN>::seed(p.sketch_max.x, 2);
  q.max_y = Dual<kN>::seed(p.sketch_max.y, 3);
  q.d_minus = Dual<kN>::seed(p.d_minus, 4);
  q.d_plus = Dual<kN>::seed(p.d_plus, 5);
  q.tau_x = Dual<kN>::seed(p.translation.x, 6);
  q.tau_y = Dual<kN>::seed(p.translation.y, 7);
  q.tau_z = Dual<kN>::seed(p.translation.z, 8);
  q.theta = Dual<kN>::seed(p.theta, 9);
  q.phi = Dual<kN>::seed(p.phi, 10);
  q.rho = Dual<kN>::seed(p.rho, 11);
  q.scale = Dual<kN>::seed(p.scale, 12);
  return q;
}

ParamsT<Dual<kN>> lift_const(const SoftParams& p) {
  ParamsT<Dual<kN>> q;
  q.min_x = p.sketch_min.x;
  q.min_y = p.sketch_min.y;
  q.max_x = p.sketch_max.x;
  q.max_y = p.sketch_max.y;
  q.d_minus = p.d_minus;
  q.d_plus = p.d_plus;
  q.tau_x = p.translation.x;
  q.tau_y = p.translation.y;
  q.tau_z = p.translation.z;
  q.theta = p.theta;
  q.phi = p.phi;
  q.rho = p.rho;
  q.scale = p.scale;
  return q;
}

// 8 corners: 4 sketch-bound corners at d- then at d+.
template <class T>
std::array<std::array<T, 3>, 8> corners_of(const ParamsT<T>& p) {
  const T* xs[2] = {&p.min_x, &p.max_x};
  const T* ys[2] = {&p.min_y, &p.max_y};
  // corner order: (min,min), (max,min), (max,max), (min,max)
  const int cx[4] = {0, 1, 1, 0};
  const int cy[4] = {0, 0, 1, 1};
  std::array<std::array<T, 3>, 8> out;
  for (int level = 0; level < 2; ++level) {
    const T& d = level == 0 ? p.d_minus : p.d_plus;
    for (int i = 0; i < 4; ++i) {
      T ex = p.scale * (*xs[cx[i]]);
      T ey = p.scale * (*ys[cy[i]]);
      auto r = rotate_xyz(p.theta, p.phi, p.rho, ex, ey, d);
      out[level * 4 + i] = {r[0] + p.tau_x, r[1] + p.tau_y, r[2] + p.tau_z};
    }
  }
  return out;
}

// log-sum-exp softmax/softmin over 8 values, stable around the pivot
template <class T>
T smooth_max8(const std::array<T, 8>& vals, double temperature) {
  T pivot = vals[0];
  for (int i = 1; i < 8; ++i) pivot = max(pivot, vals[i]);
  T acc = T(0.0);
  for (int i = 0; i < 8; ++i) acc = acc + exp((vals[i] - pivot) / T(temperature));
  return pivot + T(temperature) * log(acc);
}
template <class T>
T smooth_min8(const std::array<T, 8>& vals, double temperature) {
  std::array<T, 8> neg;
  for (int i = 0; i < 8; ++i) neg[i] = -vals[i];
  return -smooth_max8(neg, temperature);
}

template <class T>
struct HullT {
  std::array<T, 3> lo, hi;
};

template <class T>
HullT<T> smooth_hull(const ParamsT<T>& p, double temperature) {
  auto corners = corners_of(p);
  HullT<T> h;
  for (int axis = 0; axis < 3; ++axis) {
    std::array<T, 8> vals;
    for (int i = 0; i < 8; ++i) vals[i] = corners[i][axis];
    h.lo[axis] = smooth_min8(vals, temperature);
    h.hi[axis] = smooth_max8(vals, temperature);
  }
  return h;
}

template <class T>
T hull_iou(const HullT<T>& a, const HullT<T>& b) {
  T inter = T(1.0);
  for (int axis = 0; axis < 3; ++axis) {
    T len = min(a.hi[axis], b.hi[axis]) - max(a.lo[axis], b.lo[axis]);
    len = max(len, T(0.0));
    inter = inter * len;
  }
  T va = (a.hi[0] - a.lo[0]) * (a.hi[1] - a.lo[1]) * (a.hi[2] - a.lo[2]);
  T vb = (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
  return inter / (va + vb - inter);
}

}  // namespace

double SoftParams::get(int i) const {
  switch (i) {
    case 0: return sketch_min.x;
    case 1: return sketch_min.y;
    case 2: return sketch_max.x;
    case 3: return sketch_max.y;
    case 4: return d_minus;
    case 5: return d_plus;
    case 6: return translation.x;
    case 7: return translation.y;
    case 8: return translation.z;
    case 9: return theta;
    case 10: return phi;
    case 11: return rho;
    default: return scale;
  }
}

void SoftParams::set(int i, double v) {
  switch (i) {
    case 0: sketch_min.x = v; return;
    case 1: sketch_min.y = v; return;
    case 2: sketch_max.x = v; return;
    case 3: sketch_max.y = v; return;
    case 4: d_minus = v; return;
    case 5: d_plus = v; return;
    case 6: translation.x = v; return;
    case 7: translation.y = v; return;
    case 8: translation.z = v; return;
    case 9: theta = v; return;
    case 10: phi = v; return;
    case 11: rho = v; return;
    default: scale = v; return;
  }
}

SoftParams SoftParams::from_step(const ModelingStep& step) {
  SoftParams p;
  Aabb2 bounds;
  for (const Face& f : step.sketch.faces) {
    auto expand = [&](const Loop& l) {
      for (const Curve& c : l.curves)
        for (const Vec2& pt : c.points) bounds.expand(pt);
    };
    expand(f.outer);
    for (const Loop& l : f.inner) expand(l);
  }
  p.sketch_min = bounds.lo;
  p.sketch_max = bounds.hi;
  p.d_minus = step.extrusion.d_minus;
  p.d_plus = step.extrusion.d_plus;
  p.translation = step.extrusion.translation;
  p.theta = step.extrusion.theta;
  p.phi = step.extrusion.phi;
  p.rho = step.extrusion.rho;
  p.scale = step.extrusion.scale;
  return p;
}

double soft_token_expectation(std::span<const double> probs) {
  double sum = 0.0;
  double expectation = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] < 0) throw ValueRangeError("token probabilities must be nonnegative");
    sum += probs[j];
    expectation += probs[j] * static_cast<double>(j);
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValueRangeError("token probabilities must sum to 1 (got " + std::to_string(sum) + ")");
  return expectation;
}

Bbox3 soft_bbox(const SoftParams& params) {
  auto corners = corners_of(lift(params));
  Bbox3 box;
  for (int i = 0; i < 8; ++i) {
    box.corners[i] = {corners[i][0], corners[i][1], corners[i][2]};
    box.hull.expand(box.corners[i]);
  }
  return box;
}

double bbox_iou(const Bbox3& a, const Bbox3& b) {
  if (a.hull.volume() <= 0 || b.hull.volume() <= 0)
    throw DegenerateBoxError("bounding box with zero volume");
  double inter = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    double lo = std::max(a.hull.lo[axis], b.hull.lo[axis]);
    double hi = std::min(a.hull.hi[axis], b.hull.hi[axis]);
    inter *= std::max(0.0, hi - lo);
  }
  double unions = a.hull.volume() + b.hull.volume() - inter;
  return inter / unions;
}

double l_bbox(const SoftParams& pred, const SoftParams& gt) {
  double iou = bbox_iou(soft_bbox(pred), soft_bbox(gt));
  return -std::log(std::max(iou, kIouClamp));
}

double combined_loss(double ce, double bce, double lbbox, int epoch, int ep_thres) {
  double alpha = epoch > ep_thres ? 1.0 : 0.0;
  return ce + bce + alpha * lbbox;
}

SmoothHull soft_bbox_hull_smooth(const SoftParams& params) {
  auto h = smooth_hull(lift(params), kSmoothMinMaxTemperature);
  return {{h.lo[0], h.lo[1], h.lo[2]}, {h.hi[0], h.hi[1], h.hi[2]}};
}

double bbox_iou_smooth(const SoftParams& a, const SoftParams& b) {
  auto ha = smooth_hull(lift(a), kSmoothMinMaxTemperature);
  auto hb = smooth_hull(lift(b), kSmoothMinMaxTemperature);
  return hull_iou(ha, hb);
}

double l_bbox_smooth(const SoftParams& pred, const SoftParams& gt) {
  double iou = bbox_iou_smooth(pred, gt);
  return -std::log(std::max(iou, kIouClamp));
}

std::array<double, SoftParams::kCount> l_bbox_gradient(const SoftParams& pred,
                                                       const SoftParams& gt) {
  auto hp = smooth_hull(lift_dual(pred), kSmoothMinMaxTemperature);
  auto hg = smooth_hull(lift_const(gt), kSmoothMinMaxTemperature);
  Dual<kN> iou = hull_iou(hp, hg);
  Dual<kN> loss = -log(max(iou, Dual<kN>(kIouClamp)));
  return loss.d;
}

SoftBboxJacobian soft_bbox_with_jacobian(const SoftParams& params) {
  auto corners = corners_of(lift_dual(params));
  SoftBboxJacobian out;
  for (int i = 0; i < 8; ++i) {
    out.corners[i] = {corners[i][0].v, corners[i][1].v, corners[i][2].v};
    for (int axis = 0; axis < 3; ++axis) out.jacobian[i * 3 + axis] = corners[i][axis].d;
  }
  return out;
}

SmoothHullJacobian soft_bbox_hull_with_jacobian(const SoftParams& params) {
  auto h = smooth_hull(lift_dual(params), kSmoothMinMaxTemperature);
  SmoothHullJacobian out;
  for (int axis = 0; axis < 3; ++axis) {
    out.bounds[axis] = h.lo[axis].v;
    out.bounds[3 + axis] = h.hi[axis].v;
    out.jacobian[axis] = h.lo[axis].d;
    out.jacobian[3 + axis] = h.hi[axis].d;
  }
  return out;
}

}  // namespace cadrec
