#pragma once

// Reference implementations of the differentiable quantities used to
// supervise single-step reconstruction: expected token values, the
// differentiable bounding-box construction, box IoU, the -ln(IoU) loss
// and the epoch-gated loss combination.
//
// Two evaluation paths are provided. The evaluation path uses exact
// min/max (l_bbox(identical) == 0 exactly). The differentiable path uses
// log-sum-exp min/max over the 8 corners and carries analytic first
// derivatives via forward-mode duals; finite differences of the *_smooth
// functions match the *_gradient outputs.

#include <array>
#include <span>

#include "cadrec/dsl.hpp"
#include "cadrec/solid.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

inline constexpr double kIouClamp = 1e-6;
inline constexpr double kSmoothMinMaxTemperature = 1e-3;

// Continuous single-step parameters: the sketch's 2D parameter bounds
// plus the extrusion. Layout (for gradient indexing):
//   0 min.x, 1 min.y, 2 max.x, 3 max.y, 4 d_minus, 5 d_plus,
//   6 tau.x, 7 tau.y, 8 tau.z, 9 theta, 10 phi, 11 rho, 12 scale
struct SoftParams {
  Vec2 sketch_min{0, 0};
  Vec2 sketch_max{1, 1};
  double d_minus = 0.0;
  double d_plus = 1.0;
  Vec3 translation{0, 0, 0};
  double theta = 0.0;
  double phi = 0.0;
  double rho = 0.0;
  double scale = 1.0;

  static constexpr int kCount = 13;

  double get(int i) const;
  void set(int i, double v);

  // Control-point bounds of the step's sketch plus its extrusion.
  static SoftParams from_step(const ModelingStep& step);
};

// Expected token value sum_j probs[j] * j; probs must be nonnegative and
// sum to 1 within 1e-6.
double soft_token_expectation(std::span<const double> probs);

// The 4 sketch-bound corners projected at d- and d+ (8 corners), exact
// axis-aligned hull.
Bbox3 soft_bbox(const SoftParams& params);

// IoU of the two axis-aligned hulls; throws DegenerateBoxError on a
// zero-volume hull.
double bbox_iou(const Bbox3& a, const Bbox3& b);

// -ln(max(IoU, kIouClamp)) on the exact path.
double l_bbox(const SoftParams& pred, const SoftParams& gt);

// ce + bce + alpha * lbbox, alpha = 1 iff epoch > ep_thres.
double combined_loss(double ce, double bce, double lbbox, int epoch, int ep_thres = 30);

// --- differentiable path ---

// Hull of the 8 corners via log-sum-exp min/max.
struct SmoothHull {
  Vec3 lo, hi;
};
SmoothHull soft_bbox_hull_smooth(const SoftParams& params);

double bbox_iou_smooth(const SoftParams& a, const SoftParams& b);
double l_bbox_smooth(const SoftParams& pred, const SoftParams& gt);

// d l_bbox_smooth / d pred (gt held fixed).
std::array<double, SoftParams::kCount> l_bbox_gradient(const SoftParams& pred,
                                                       const SoftParams& gt);

// Corners plus the full Jacobian d corner_coord / d param; rows ordered
// corner-major (corner 0 x,y,z, corner 1 x,y,z, ...).
struct SoftBboxJacobian {
  std::array<Vec3, 8> corners;
  std::array<std::array<double, SoftParams::kCount>, 24> jacobian;
};
SoftBboxJacobian soft_bbox_with_jacobian(const SoftParams& params);

// Smooth hull bounds as a 6-vector (lo.x,lo.y,lo.z,hi.x,hi.y,hi.z) with
// its Jacobian, for checking the smooth min/max path itself.
struct SmoothHullJacobian {
  std::array<double, 6> bounds;
  std::array<std::array<double, SoftParams::kCount>, 6> jacobian;
};
SmoothHullJacobian soft_bbox_hull_with_jacobian(const SoftParams& params);

}  // namespace cadrec
