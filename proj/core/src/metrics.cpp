#include "cadrec/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "cadrec/errors.hpp"
#include "cadrec/kdtree.hpp"
#include "cadrec/rng.hpp"
#include "cadrec/solid.hpp"

namespace cadrec {

UnitBoxTransform unit_box_transform(const Aabb3& bounds) {
  if (bounds.empty()) throw DegenerateInputError("cannot normalize an empty bound");
  double extent = bounds.max_extent();
  if (extent <= 0) throw DegenerateInputError("cannot normalize zero-extent geometry");
  UnitBoxTransform t;
  t.scale = 1.0 / extent;
  Vec3 e = bounds.extent();
  t.offset = {-bounds.lo.x * t.scale + 0.5 * (1.0 - e.x * t.scale),
              -bounds.lo.y * t.scale + 0.5 * (1.0 - e.y * t.scale),
              -bounds.lo.z * t.scale + 0.5 * (1.0 - e.z * t.scale)};
  return t;
}

PointCloud normalize_unit_box(const PointCloud& cloud) {
  if (cloud.empty()) throw DegenerateInputError("cannot normalize an empty cloud");
  UnitBoxTransform t = unit_box_transform(cloud.bounds());
  PointCloud out = cloud;
  for (Vec3& p : out.positions) p = t.apply(p);
  // normals are unchanged by uniform scale + translation
  return out;
}

namespace {

double mean_sq_nn(const PointCloud& from, const KdTree3& to_tree) {
  double acc = 0.0;
  for (const Vec3& p : from.positions) acc += to_tree.nearest(p).dist2;
  return acc / static_cast<double>(from.size());
}

double max_nn(const PointCloud& from, const KdTree3& to_tree) {
  double worst = 0.0;
  for (const Vec3& p : from.positions) worst = std::max(worst, to_tree.nearest(p).dist2);
  return std::sqrt(worst);
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw DegenerateInputError("chamfer of an empty cloud");
  KdTree3 ta(a.positions), tb(b.positions);
  return 0.5 * (mean_sq_nn(a, tb) + mean_sq_nn(b, ta));
}

double chamfer(const PointCloud& a, const PointCloud& b, const KdTree3& b_tree) {
  if (a.empty() || b.empty()) throw DegenerateInputError("chamfer of an empty cloud");
  KdTree3 ta(a.positions);
  return 0.5 * (mean_sq_nn(a, b_tree) + mean_sq_nn(b, ta));
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw DegenerateInputError("hausdorff of an empty cloud");
  KdTree3 ta(a.positions), tb(b.positions);
  return std::max(max_nn(a, tb), max_nn(b, ta));
}

std::vector<int> edge_point_indices(const PointCloud& cloud, double radius, double angle_deg) {
  if (!cloud.has_normals()) throw DegenerateInputError("edge detection requires normals");
  KdTree3 tree(cloud.positions);
  double cos_threshold = std::cos(angle_deg * kPi / 180.0);
  std::vector<int> edges;
  std::vector<int> neighbors;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    tree.radius_search(cloud.positions[i], radius, neighbors);
    const Vec3& n = cloud.normals[i];
    for (int j : neighbors) {
      if (j == static_cast<int>(i)) continue;
      if (std::abs(n.dot(cloud.normals[j])) < cos_threshold) {
        edges.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  return edges;
}

EdgeChamferResult edge_chamfer(const PointCloud& a, const PointCloud& b, double radius,
                               double angle_deg) {
  std::vector<int> ea = edge_point_indices(a, radius, angle_deg);
  std::vector<int> eb = edge_point_indices(b, radius, angle_deg);
  if (ea.empty() || eb.empty()) return {chamfer(a, b), false};
  PointCloud pa, pb;
  pa.positions.reserve(ea.size());
  pb.positions.reserve(eb.size());
  for (int i : ea) pa.positions.push_back(a.positions[i]);
  for (int i : eb) pb.positions.push_back(b.positions[i]);
  return {chamfer(pa, pb), true};
}

double normal_consistency(const PointCloud& a, const PointCloud& b) {
  if (!a.has_normals() || !b.has_normals())
    throw DegenerateInputError("normal consistency requires normals on both clouds");
  KdTree3 ta(a.positions), tb(b.positions);
  auto directed = [](const PointCloud& from, const PointCloud& to, const KdTree3& tree) {
    double acc = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      int j = tree.nearest(from.positions[i]).index;
      acc += std::abs(from.normals[i].dot(to.normals[j]));
    }
    return acc / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b, tb) + directed(b, a, ta));
}

double invalid_ratio(const std::vector<bool>& valid) {
  if (valid.empty()) throw DegenerateInputError("invalid_ratio of an empty result list");
  int invalid = 0;
  for (bool v : valid)
    if (!v) ++invalid;
  return 100.0 * invalid / static_cast<double>(valid.size());
}

namespace {

// Longest prefix that executes and samples successfully; nullopt when
// none does (the model counts as invalid).
std::optional<PointCloud> sample_best_prefix(const CadSequence& seq, int n, std::uint64_t seed,
                                             double chord_tol, int& steps_used) {
  for (std::size_t len = seq.size(); len >= 1; --len) {
    try {
      Solid solid = Solid::from_sequence(seq.prefix(len), chord_tol);
      PointCloud cloud = solid.sample_surface(n, seed);
      steps_used = static_cast<int>(len);
      return cloud;
    } catch (const Error&) {
      continue;
    }
  }
  return std::nullopt;
}

}  // namespace

MetricsReport evaluate_dataset(const std::vector<EvalPair>& pairs, const EvalConfig& config) {
  if (pairs.empty()) throw DegenerateInputError("evaluate_dataset needs at least one pair");
  MetricsReport report;
  report.config = {{"samples", config.samples}, {"seed", config.seed},
                   {"chord_tol", config.chord_tol}};

  for (const EvalPair& pair : pairs) {
    auto t0 = std::chrono::steady_clock::now();
    ModelMetrics row;
    row.id = pair.id;

    PointCloud gt_cloud;
    bool gt_ok = true;
    try {
      if (std::holds_alternative<CadSequence>(pair.gt)) {
        Solid gt_solid = Solid::from_sequence(std::get<CadSequence>(pair.gt), config.chord_tol);
        gt_cloud = gt_solid.sample_surface(config.samples, derive_seed(config.seed, 1));
      } else {
        gt_cloud = std::get<PointCloud>(pair.gt);
      }
    } catch (const Error& e) {
      row.note = std::string("ground truth failed: ") + e.what();
      gt_ok = false;
    }

    if (gt_ok && pair.prediction.has_value()) {
      int steps_used = 0;
      std::optional<PointCloud> pred_cloud =
          sample_best_prefix(*pair.prediction, config.samples, derive_seed(config.seed, 2),
                             config.chord_tol, steps_used);
      if (pred_cloud.has_value()) {
        try {
          PointCloud gt_n = normalize_unit_box(gt_cloud);
          PointCloud pred_n = normalize_unit_box(*pred_cloud);
          row.cd = chamfer(gt_n, pred_n);
          row.hd = hausdorff(gt_n, pred_n);
          if (gt_n.has_normals() && pred_n.has_normals()) {
            EdgeChamferResult ecd = edge_chamfer(gt_n, pred_n);
            row.ecd = ecd.value;
            row.ecd_edge_based = ecd.edge_based;
            row.nc = normal_consistency(gt_n, pred_n);
          } else {
            row.ecd = row.cd;
            row.ecd_edge_based = false;
            row.nc = 0.0;
            row.note = "ground truth cloud has no normals; ecd/nc degraded";
          }
          row.valid = true;
          row.steps = steps_used;
        } catch (const Error& e) {
          row.note = std::string("metric computation failed: ") + e.what();
        }
      } else {
        row.note = "no prefix of the prediction executes";
      }
    } else if (gt_ok) {
      row.note = "missing prediction";
    }

    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.per_model.push_back(std::move(row));
  }

  std::vector<bool> validity;
  for (const ModelMetrics& row : report.per_model) {
    validity.push_back(row.valid);
    if (row.valid) {
      report.cd_mean += row.cd;
      report.hd_mean += row.hd;
      report.ecd_mean += row.ecd;
      report.nc_mean += row.nc;
      ++report.valid_count;
    }
  }
  if (report.valid_count > 0) {
    report.cd_mean /= report.valid_count;
    report.hd_mean /= report.valid_count;
    report.ecd_mean /= report.valid_count;
    report.nc_mean /= report.valid_count;
  }
  report.ir_percent = invalid_ratio(validity);
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const ModelMetrics& m : per_model) {
    models.push_back({{"id", m.id},
                      {"valid", m.valid},
                      {"cd", m.cd},
                      {"hd", m.hd},
                      {"ecd", m.ecd},
                      {"nc", m.nc},
                      {"cd_x100", m.cd * 100.0},
                      {"hd_x100", m.hd * 100.0},
                      {"ecd_x100", m.ecd * 100.0},
                      {"ecd_edge_based", m.ecd_edge_based},
                      {"steps", m.steps},
                      {"seconds", m.seconds},
                      {"note", m.note}});
  }
  return {{"config", config},
          {"models", models},
          {"aggregate",
           {{"count", per_model.size()},
            {"valid_count", valid_count},
            {"cd_mean", cd_mean},
            {"hd_mean", hd_mean},
            {"ecd_mean", ecd_mean},
            {"nc_mean", nc_mean},
            {"cd_mean_x100", cd_mean * 100.0},
            {"hd_mean_x100", hd_mean * 100.0},
            {"ecd_mean_x100", ecd_mean * 100.0},
            {"ir_percent", ir_percent}}}};
}

std::string MetricsReport::to_csv() const {
  std::string out = "id,cd,hd,ecd,nc,valid,steps,runtime\n";
  char buf[256];
  for (const ModelMetrics& m : per_model) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%d,%d,%.3f\n", m.id.c_str(), m.cd,
                  m.hd, m.ecd, m.nc, m.valid ? 1 : 0, m.steps, m.seconds);
    out += buf;
  }
  return out;
}

}  // namespace cadrec
