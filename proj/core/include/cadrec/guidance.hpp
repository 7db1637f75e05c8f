#pragma once

// Geometric guidance for the iterative reconstruction loop: difference
// masks between the target cloud and the executed-state cloud, the
// reference cloud assembled from them, RANSAC plane detection on it and
// planar prompt sampling.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "cadrec/pointcloud.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

// Plane {x : normal . x = offset}; inliers index into the source cloud.
struct Plane {
  Vec3 normal{0, 0, 1};
  double offset = 0.0;
  std::vector<int> inliers;

  double distance(const Vec3& p) const { return std::abs(normal.dot(p) - offset); }
  nlohmann::json to_json(bool include_inliers = false) const;
};

struct PlanePrompt {
  std::vector<Vec3> points;
  Plane plane;

  nlohmann::json to_json() const;
};

struct DiffMasks {
  std::vector<std::uint8_t> full;
  std::vector<std::uint8_t> prev;
};

// mask.full[i] = 1 iff the nearest point of `prev` is farther than tau
// from full[i] (all ones when prev is empty); mask.prev symmetric.
DiffMasks diff_mask(const PointCloud& p_full, const PointCloud& p_prev, double tau);

inline constexpr double kDefaultDiffTau = 0.03;

// Reference cloud: the mask-1 points of both clouds, with provenance.
struct RefCloud {
  PointCloud cloud;
  std::vector<std::uint8_t> from_prev;  // 0 = from full, 1 = from prev

  bool empty() const { return cloud.empty(); }
  std::size_t size() const { return cloud.size(); }
};

// Empty result signals that the reconstruction is complete.
RefCloud build_p_ref(const PointCloud& p_full, const PointCloud& p_prev, const DiffMasks& masks);

struct RansacParams {
  double t = 1e-3;       // inlier distance threshold
  int min_inliers = 128;  // d: inliers required to accept a plane
  int max_planes = 8;
  int iterations = 1000;  // hypotheses per plane
  double early_exit_fraction = 0.5;
};

// Sequential RANSAC: detect the best plane among `iterations` 3-point
// hypotheses, refit on inliers, remove them, repeat. Planes are returned
// in descending inlier count; deterministic per seed. Empty result when
// no plane reaches min_inliers.
std::vector<Plane> detect_planes(const PointCloud& cloud, const RansacParams& params,
                                 std::uint64_t seed);

// k inliers chosen uniformly without replacement; throws
// InsufficientSupportError when the plane has fewer than k inliers.
PlanePrompt sample_prompt(const Plane& plane, const PointCloud& cloud, int k,
                          std::uint64_t seed);

}  // namespace cadrec
