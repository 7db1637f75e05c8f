#include "cadrec/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "cadrec/errors.hpp"
#include "cadrec/kdtree.hpp"
#include "cadrec/rng.hpp"

namespace cadrec {

nlohmann::json Plane::to_json(bool include_inliers) const {
  nlohmann::json j = {{"normal", {normal.x, normal.y, normal.z}},
                      {"offset", offset},
                      {"inlier_count", inliers.size()}};
  if (include_inliers) j["inliers"] = inliers;
  return j;
}

nlohmann::json PlanePrompt::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const Vec3& p : points) pts.push_back({p.x, p.y, p.z});
  return {{"points", pts}, {"plane", plane.to_json()}};
}

DiffMasks diff_mask(const PointCloud& p_full, const PointCloud& p_prev, double tau) {
  DiffMasks masks;
  masks.full.assign(p_full.size(), 1);
  masks.prev.assign(p_prev.size(), 0);
  if (p_prev.empty()) return masks;  // first iteration: everything is new

  const double tau2 = tau * tau;
  KdTree3 prev_tree(p_prev.positions);
  for (std::size_t i = 0; i < p_full.size(); ++i)
    masks.full[i] = prev_tree.nearest(p_full.positions[i]).dist2 > tau2 ? 1 : 0;

  KdTree3 full_tree(p_full.positions);
  for (std::size_t i = 0; i < p_prev.size(); ++i)
    masks.prev[i] = full_tree.nearest(p_prev.positions[i]).dist2 > tau2 ? 1 : 0;
  return masks;
}

RefCloud build_p_ref(const PointCloud& p_full, const PointCloud& p_prev, const DiffMasks& masks) {
  if (masks.full.size() != p_full.size() || masks.prev.size() != p_prev.size())
    throw DegenerateInputError("diff masks do not match their clouds");
  RefCloud ref;
  bool normals = p_full.has_normals() && (p_prev.empty() || p_prev.has_normals());
  for (std::size_t i = 0; i < p_full.size(); ++i) {
    if (!masks.full[i]) continue;
    ref.cloud.positions.push_back(p_full.positions[i]);
    if (normals) ref.cloud.normals.push_back(p_full.normals[i]);
    ref.from_prev.push_back(0);
  }
  for (std::size_t i = 0; i < p_prev.size(); ++i) {
    if (!masks.prev[i]) continue;
    ref.cloud.positions.push_back(p_prev.positions[i]);
    if (normals) ref.cloud.normals.push_back(p_prev.normals[i]);
    ref.from_prev.push_back(1);
  }
  return ref;
}

namespace {

struct FitPlane {
  Vec3 normal;
  double offset;
};

bool plane_through(const Vec3& a, const Vec3& b, const Vec3& c, FitPlane& out) {
  Vec3 n = (b - a).cross(c - a);
  double len = n.norm();
  if (len < 1e-12) return false;
  out.normal = n / len;
  out.offset = out.normal.dot(a);
  return true;
}

// Least-squares plane through the given points (smallest eigenvector of
// the covariance via inverse iteration on the 3x3 system).
FitPlane refit_plane(const std::vector<Vec3>& pts, const std::vector<int>& idx,
                     const FitPlane& seed_plane) {
  Vec3 centroid{0, 0, 0};
  for (int i : idx) centroid += pts[i];
  centroid = centroid / static_cast<double>(idx.size());

  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (int i : idx) {
    Vec3 d = pts[i] - centroid;
    xx += d.x * d.x; xy += d.x * d.y; xz += d.x * d.z;
    yy += d.y * d.y; yz += d.y * d.z; zz += d.z * d.z;
  }
  // power iteration on (trace*I - C) amplifies the smallest eigenvector
  double tr = xx + yy + zz;
  auto apply = [&](const Vec3& v) {
    return Vec3{(tr - xx) * v.x - xy * v.y - xz * v.z,
                -xy * v.x + (tr - yy) * v.y - yz * v.z,
                -xz * v.x - yz * v.y + (tr - zz) * v.z};
  };
  Vec3 n = seed_plane.normal;
  for (int it = 0; it < 24; ++it) {
    Vec3 next = apply(n);
    double len = next.norm();
    if (len < 1e-15) break;
    n = next / len;
  }
  if (n.dot(seed_plane.normal) < 0) n = -n;
  return {n, n.dot(centroid)};
}

}  // namespace

std::vector<Plane> detect_planes(const PointCloud& cloud, const RansacParams& params,
                                 std::uint64_t seed) {
  std::vector<Plane> planes;
  if (cloud.size() < 3) return planes;

  Rng rng(seed);
  std::vector<int> active(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) active[i] = static_cast<int>(i);

  const double t = params.t;
  for (int round = 0; round < params.max_planes; ++round) {
    if (static_cast<int>(active.size()) < std::max(3, params.min_inliers)) break;

    FitPlane best{};
    int best_count = -1;
    for (int it = 0; it < params.iterations; ++it) {
      int ia = static_cast<int>(rng.uniform_index(active.size()));
      int ib = static_cast<int>(rng.uniform_index(active.size()));
      int ic = static_cast<int>(rng.uniform_index(active.size()));
      if (ia == ib || ib == ic || ia == ic) continue;
      FitPlane hyp;
      if (!plane_through(cloud.positions[active[ia]], cloud.positions[active[ib]],
                         cloud.positions[active[ic]], hyp))
        continue;
      int count = 0;
      for (int idx : active)
        if (std::abs(hyp.normal.dot(cloud.positions[idx]) - hyp.offset) <= t) ++count;
      if (count > best_count) {
        best_count = count;
        best = hyp;
      }
      if (best_count > params.early_exit_fraction * static_cast<double>(active.size())) break;
    }
    if (best_count < params.min_inliers) break;

    std::vector<int> inliers;
    for (int idx : active)
      if (std::abs(best.normal.dot(cloud.positions[idx]) - best.offset) <= t)
        inliers.push_back(idx);
    FitPlane refined = refit_plane(cloud.positions, inliers, best);
    std::vector<int> refined_inliers;
    for (int idx : active)
      if (std::abs(refined.normal.dot(cloud.positions[idx]) - refined.offset) <= t)
        refined_inliers.push_back(idx);
    if (static_cast<int>(refined_inliers.size()) < params.min_inliers) {
      refined = best;
      refined_inliers = inliers;
    }

    Plane plane;
    plane.normal = refined.normal;
    plane.offset = refined.offset;
    plane.inliers = refined_inliers;
    planes.push_back(std::move(plane));

    std::vector<int> remaining;
    remaining.reserve(active.size() - refined_inliers.size());
    std::size_t k = 0;
    for (int idx : active) {
      if (k < refined_inliers.size() && refined_inliers[k] == idx)
        ++k;
      else
        remaining.push_back(idx);
    }
    active = std::move(remaining);
  }

  std::stable_sort(planes.begin(), planes.end(), [](const Plane& a, const Plane& b) {
    return a.inliers.size() > b.inliers.size();
  });
  return planes;
}

PlanePrompt sample_prompt(const Plane& plane, const PointCloud& cloud, int k,
                          std::uint64_t seed) {
  if (static_cast<int>(plane.inliers.size()) < k)
    throw InsufficientSupportError("plane has " + std::to_string(plane.inliers.size()) +
                                   " inliers, prompt needs " + std::to_string(k));
  // partial Fisher-Yates over a copy of the inlier list
  std::vector<int> pool = plane.inliers;
  Rng rng(seed);
  PlanePrompt prompt;
  prompt.points.reserve(k);
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    prompt.points.push_back(cloud.positions[pool[i]]);
  }
  prompt.plane = plane;
  return prompt;
}

}  // namespace cadrec
