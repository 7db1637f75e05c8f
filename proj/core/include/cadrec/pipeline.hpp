#pragma once

// Iterative prompt-and-select reconstruction: guidance -> one candidate
// per prompt -> selection -> state update, until the reconstruction error
// is small enough, the step budget runs out, or no candidate improves.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "cadrec/dsl.hpp"
#include "cadrec/guidance.hpp"
#include "cadrec/kdtree.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/selection.hpp"
#include "cadrec/solid.hpp"
#include "cadrec/stepfit.hpp"

namespace cadrec {

struct PipelineConfig {
  int n_points = 8192;
  RansacParams ransac;          // t = 1e-3, d = 128
  int prompt_size = 64;
  Strategy strategy = Strategy::Geo;
  // Squared-chamfer convergence shortcut. The same-surface sampling floor
  // at 8192 points is ~2.4e-5, so 1e-4 means "indistinguishable from
  // done"; the improvement gate stops the loop in every other case.
  double stop_cd = 1e-4;
  int max_steps = 10;
  double tau = kDefaultDiffTau;
  double min_cd_improvement = 1e-4;
  int min_ref_points = 32;
  StepFitParams fit;
  int geo_samples = 4096;
  int threads = 1;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);  // partial overrides
};

struct ReconState {
  CadSequence seq;
  Solid solid;
  PointCloud p_prev;            // fresh surface sample of `solid`
  PointCloud last_ref;          // reference cloud of the latest iteration
  int t = 0;
  double cd = std::numeric_limits<double>::infinity();
  std::vector<double> cd_history;  // cd after each accepted step
  nlohmann::json iterations = nlohmann::json::array();
  std::string stop_reason;      // set when the loop should stop
};

enum class IterationOutcome { Accepted, Stopped };

// One guidance/reconstruct/select/update round. Appends its trace record
// to state.iterations; sets state.stop_reason when the loop is done
// (possibly together with a final accepted step).
IterationOutcome iterate_once(ReconState& state, const PointCloud& p_full,
                              const KdTree3& p_full_tree, const PipelineConfig& config);

struct PipelineResult {
  CadSequence sequence;         // best prefix by chamfer distance
  double final_cd = 0.0;
  int iterations = 0;
  std::string stop_reason;
  nlohmann::json trace;
};

// Called after every accepted step with the partial solid and the
// reference cloud that produced it (for per-step dumps).
using IterationDump = std::function<void(int t, const Solid& partial, const PointCloud& p_ref)>;

// Throws InvalidReconstructionError (with the trace attached) when no
// step ever executes. p_full is expected normalized into the unit box.
PipelineResult run(const PointCloud& p_full, const PipelineConfig& config,
                   const IterationDump& dump = {});

}  // namespace cadrec
