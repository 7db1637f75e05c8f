#pragma once

// Geometry evaluation: unit-box normalization, chamfer / Hausdorff /
// edge-chamfer distances, normal consistency, invalidity ratio and batch
// reports. Chamfer distances are squared and symmetric (sum of both
// directions / 2); Hausdorff is unsquared. Reports carry raw values and
// the conventional x100 scaling side by side.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cadrec/dsl.hpp"
#include "cadrec/kdtree.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

struct UnitBoxTransform {
  double scale = 1.0;
  Vec3 offset{0, 0, 0};
  Vec3 apply(const Vec3& p) const { return p * scale + offset; }
};

// Uniform scale + translation putting the box into [0,1]^3 with the
// longest axis spanning exactly 1, centered on the other axes. Throws
// DegenerateInputError on empty or zero-extent input.
UnitBoxTransform unit_box_transform(const Aabb3& bounds);

PointCloud normalize_unit_box(const PointCloud& cloud);

double chamfer(const PointCloud& a, const PointCloud& b);
// Same, with a prebuilt index for b (hot loops score many clouds against
// one fixed target).
double chamfer(const PointCloud& a, const PointCloud& b, const KdTree3& b_tree);
double hausdorff(const PointCloud& a, const PointCloud& b);

// A point is an edge point when some neighbor within radius has a normal
// more than angle_deg away (orientation-agnostic). When either cloud has
// no edge points the plain chamfer of the full clouds is returned with
// edge_based = false so aggregates stay finite.
struct EdgeChamferResult {
  double value = 0.0;
  bool edge_based = true;
};
EdgeChamferResult edge_chamfer(const PointCloud& a, const PointCloud& b, double radius = 0.02,
                               double angle_deg = 30.0);

std::vector<int> edge_point_indices(const PointCloud& cloud, double radius = 0.02,
                                    double angle_deg = 30.0);

// Mean over both directions of |cos| between each point's normal and its
// nearest neighbor's normal; in [0, 1].
double normal_consistency(const PointCloud& a, const PointCloud& b);

// 100 * invalid / total; throws DegenerateInputError on an empty list.
double invalid_ratio(const std::vector<bool>& valid);

struct ModelMetrics {
  std::string id;
  bool valid = false;
  double cd = 0.0;
  double hd = 0.0;
  double ecd = 0.0;
  double nc = 0.0;
  bool ecd_edge_based = true;
  int steps = 0;
  double seconds = 0.0;
  std::string note;  // per-pair failure reason, empty when clean
};

struct MetricsReport {
  std::vector<ModelMetrics> per_model;
  // aggregates over valid models only (IR over all)
  double cd_mean = 0.0;
  double hd_mean = 0.0;
  double ecd_mean = 0.0;
  double nc_mean = 0.0;
  double ir_percent = 0.0;
  int valid_count = 0;
  nlohmann::json config;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct EvalConfig {
  int samples = 16382;
  std::uint64_t seed = 0;
  double chord_tol = 1.0 / 256.0;
};

// Ground truth is either an executable sequence or a raw cloud.
using GroundTruth = std::variant<CadSequence, PointCloud>;

struct EvalPair {
  std::string id;
  GroundTruth gt;
  std::optional<CadSequence> prediction;  // nullopt = missing, counted invalid
};

// Normalizes both sides, samples `samples` points, computes all metrics.
// Per-pair failures are recorded in the row note and never abort the batch.
MetricsReport evaluate_dataset(const std::vector<EvalPair>& pairs, const EvalConfig& config);

}  // namespace cadrec
