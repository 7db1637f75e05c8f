#pragma once

// Candidate scoring and selection. Strategies follow the three reference
// policies: geo (lowest chamfer distance after executing the candidate),
// heur (largest cylinder volume) and rand (uniform). score_oracle is the
// ground-truth fitness target — box IoU of the executed shapes gated by
// boolean-flag agreement — available when ground truth exists.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cadrec/kdtree.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/solid.hpp"
#include "cadrec/stepfit.hpp"

namespace cadrec {

enum class Strategy { Geo, Heur, Rand };

Strategy strategy_from_name(const std::string& name);  // "geo" | "heur" | "rand"
const char* strategy_name(Strategy s);

// Chamfer distance between the surface of state+candidate and the target
// cloud; lower is better. A candidate that fails to execute is
// disqualified with +inf.
double score_geo(const CandidateStep& candidate, const Solid& state, const PointCloud& p_full,
                 const KdTree3& p_full_tree, std::uint64_t seed, int samples = 4096);

// Monte-Carlo volume of the candidate cylinder alone (1e4 samples in its
// bounding box); higher is better.
double score_heur(const CandidateStep& candidate, std::uint64_t seed);

// Uniform scores for a candidate list drawn from one seeded generator;
// higher is better, so selection over the list is uniform.
std::vector<double> score_random(std::size_t count, std::uint64_t seed);

// Fitness target: IoU of the two steps' axis-aligned cylinder bounding
// boxes when the boolean flags agree, 0 otherwise.
double score_oracle(const ModelingStep& candidate, const ModelingStep& gt);

struct SelectionResult {
  int index = -1;                // chosen candidate
  std::vector<double> scores;    // per candidate, strategy ordering
  std::vector<int> ranking;      // candidate indices best-first
};

// Best candidate under the strategy; ties break toward the larger prompt
// inlier count, then the lower index. Throws NoCandidateError on an
// empty list. Deterministic in (candidates, strategy, seed).
SelectionResult select(std::span<const CandidateStep> candidates, Strategy strategy,
                       const Solid& state, const PointCloud& p_full,
                       const KdTree3& p_full_tree, std::uint64_t seed,
                       int geo_samples = 4096);

}  // namespace cadrec
