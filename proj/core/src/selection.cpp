#include "cadrec/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cadrec/errors.hpp"
#include "cadrec/losses.hpp"
#include "cadrec/metrics.hpp"
#include "cadrec/rng.hpp"

namespace cadrec {

Strategy strategy_from_name(const std::string& name) {
  if (name == "geo") return Strategy::Geo;
  if (name == "heur") return Strategy::Heur;
  if (name == "rand") return Strategy::Rand;
  throw InputError("unknown selection strategy '" + name + "' (use geo, heur or rand)");
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Geo: return "geo";
    case Strategy::Heur: return "heur";
    case Strategy::Rand: return "rand";
  }
  return "?";
}

double score_geo(const CandidateStep& candidate, const Solid& state, const PointCloud& p_full,
                 const KdTree3& p_full_tree, std::uint64_t seed, int samples) {
  Solid trial = state;
  trial.add_step(candidate.step.sketch, candidate.step.extrusion, candidate.step.op);
  try {
    PointCloud sample = trial.sample_surface(samples, seed);
    return chamfer(sample, p_full, p_full_tree);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

double score_heur(const CandidateStep& candidate, std::uint64_t seed) {
  ExtrusionCylinder cyl(candidate.step.sketch, candidate.step.extrusion);
  Aabb3 box = cyl.bounds().hull;
  Rng rng(seed);
  const int kSamples = 10000;
  int inside = 0;
  for (int i = 0; i < kSamples; ++i) {
    Vec3 q{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
           rng.uniform(box.lo.z, box.hi.z)};
    if (cyl.contains(q)) ++inside;
  }
  return box.volume() * static_cast<double>(inside) / kSamples;
}

std::vector<double> score_random(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> scores(count);
  for (double& s : scores) s = rng.uniform();
  return scores;
}

double score_oracle(const ModelingStep& candidate, const ModelingStep& gt) {
  if (candidate.op != gt.op) return 0.0;
  Bbox3 a = soft_bbox(SoftParams::from_step(candidate));
  Bbox3 b = soft_bbox(SoftParams::from_step(gt));
  return bbox_iou(a, b);
}

SelectionResult select(std::span<const CandidateStep> candidates, Strategy strategy,
                       const Solid& state, const PointCloud& p_full,
                       const KdTree3& p_full_tree, std::uint64_t seed, int geo_samples) {
  if (candidates.empty()) throw NoCandidateError("no candidate steps to select from");

  SelectionResult result;
  result.scores.resize(candidates.size());
  bool lower_better = strategy == Strategy::Geo;
  switch (strategy) {
    case Strategy::Geo:
      for (std::size_t i = 0; i < candidates.size(); ++i)
        result.scores[i] = score_geo(candidates[i], state, p_full, p_full_tree,
                                     derive_seed(seed, i), geo_samples);
      break;
    case Strategy::Heur:
      for (std::size_t i = 0; i < candidates.size(); ++i)
        result.scores[i] = score_heur(candidates[i], derive_seed(seed, i));
      break;
    case Strategy::Rand:
      result.scores = score_random(candidates.size(), seed);
      break;
  }

  result.ranking.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) result.ranking[i] = static_cast<int>(i);
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](int a, int b) {
    double sa = result.scores[a], sb = result.scores[b];
    if (sa != sb) return lower_better ? sa < sb : sa > sb;
    // tie-break: larger prompt inlier count, then lower index
    std::size_t ia = candidates[a].prompt.plane.inliers.size();
    std::size_t ib = candidates[b].prompt.plane.inliers.size();
    if (ia != ib) return ia > ib;
    return a < b;
  });
  result.index = result.ranking.front();
  return result;
}

}  // namespace cadrec
