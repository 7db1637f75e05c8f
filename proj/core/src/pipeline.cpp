#include "cadrec/pipeline.hpp"

#include <algorithm>
#include <optional>

#include "cadrec/dsl_io.hpp"
#include "cadrec/errors.hpp"
#include "cadrec/metrics.hpp"
#include "cadrec/parallel.hpp"
#include "cadrec/rng.hpp"

namespace cadrec {

using nlohmann::json;

json PipelineConfig::to_json() const {
  return {{"n_points", n_points},
          {"ransac",
           {{"t", ransac.t},
            {"d", ransac.min_inliers},
            {"max_planes", ransac.max_planes},
            {"iterations", ransac.iterations},
            {"early_exit_fraction", ransac.early_exit_fraction}}},
          {"prompt_size", prompt_size},
          {"strategy", strategy_name(strategy)},
          {"stop_cd", stop_cd},
          {"max_steps", max_steps},
          {"tau", tau},
          {"min_cd_improvement", min_cd_improvement},
          {"min_ref_points", min_ref_points},
          {"fit",
           {{"cell", fit.cell},
            {"slab_half", fit.slab_half},
            {"fit_tol_cells", fit.fit_tol_cells},
            {"snap_tol", fit.snap_tol},
            {"min_thickness", fit.min_thickness},
            {"gap_tol", fit.gap_tol},
            {"min_slab_points", fit.min_slab_points},
            {"chord_tol", fit.chord_tol}}},
          {"geo_samples", geo_samples},
          {"threads", threads},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("n_points")) c.n_points = j.at("n_points").get<int>();
  if (j.contains("ransac")) {
    const json& r = j.at("ransac");
    if (r.contains("t")) c.ransac.t = r.at("t").get<double>();
    if (r.contains("d")) c.ransac.min_inliers = r.at("d").get<int>();
    if (r.contains("max_planes")) c.ransac.max_planes = r.at("max_planes").get<int>();
    if (r.contains("iterations")) c.ransac.iterations = r.at("iterations").get<int>();
    if (r.contains("early_exit_fraction"))
      c.ransac.early_exit_fraction = r.at("early_exit_fraction").get<double>();
  }
  if (j.contains("prompt_size")) c.prompt_size = j.at("prompt_size").get<int>();
  if (j.contains("strategy")) c.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  if (j.contains("stop_cd")) c.stop_cd = j.at("stop_cd").get<double>();
  if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<int>();
  if (j.contains("tau")) c.tau = j.at("tau").get<double>();
  if (j.contains("min_cd_improvement"))
    c.min_cd_improvement = j.at("min_cd_improvement").get<double>();
  if (j.contains("min_ref_points")) c.min_ref_points = j.at("min_ref_points").get<int>();
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    if (f.contains("cell")) c.fit.cell = f.at("cell").get<double>();
    if (f.contains("slab_half")) c.fit.slab_half = f.at("slab_half").get<double>();
    if (f.contains("fit_tol_cells")) c.fit.fit_tol_cells = f.at("fit_tol_cells").get<double>();
    if (f.contains("snap_tol")) c.fit.snap_tol = f.at("snap_tol").get<double>();
    if (f.contains("min_thickness")) c.fit.min_thickness = f.at("min_thickness").get<double>();
    if (f.contains("gap_tol")) c.fit.gap_tol = f.at("gap_tol").get<double>();
    if (f.contains("min_slab_points"))
      c.fit.min_slab_points = f.at("min_slab_points").get<int>();
    if (f.contains("chord_tol")) c.fit.chord_tol = f.at("chord_tol").get<double>();
  }
  if (j.contains("geo_samples")) c.geo_samples = j.at("geo_samples").get<int>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

namespace {

// per-iteration seed salts
constexpr std::uint64_t kSaltPlanes = 1;
constexpr std::uint64_t kSaltPrompt = 0x100;
constexpr std::uint64_t kSaltCandidate = 0x200;
constexpr std::uint64_t kSaltSelect = 0x300;
constexpr std::uint64_t kSaltAccept = 0x400;

std::uint64_t iter_seed(const PipelineConfig& cfg, int t, std::uint64_t salt) {
  return derive_seed(cfg.seed, (static_cast<std::uint64_t>(t) << 32) | salt);
}

}  // namespace

IterationOutcome iterate_once(ReconState& state, const PointCloud& p_full,
                              const KdTree3& p_full_tree, const PipelineConfig& config) {
  json record;
  record["t"] = state.t;

  DiffMasks masks = diff_mask(p_full, state.p_prev, config.tau);
  RefCloud ref = build_p_ref(p_full, state.p_prev, masks);
  state.last_ref = ref.cloud;
  int mask_full_count = 0, mask_prev_count = 0;
  for (auto m : masks.full) mask_full_count += m;
  for (auto m : masks.prev) mask_prev_count += m;
  record["mask_full_count"] = mask_full_count;
  record["mask_prev_count"] = mask_prev_count;
  record["ref_count"] = ref.size();

  if (static_cast<int>(ref.size()) < config.min_ref_points) {
    state.stop_reason = "converged";
    record["stop"] = state.stop_reason;
    state.iterations.push_back(std::move(record));
    return IterationOutcome::Stopped;
  }

  std::vector<Plane> planes =
      detect_planes(ref.cloud, config.ransac, iter_seed(config, state.t, kSaltPlanes));
  json planes_json = json::array();
  for (const Plane& p : planes) planes_json.push_back(p.to_json());
  record["planes"] = planes_json;
  if (planes.empty()) {
    state.stop_reason = "no-planes";
    record["stop"] = state.stop_reason;
    state.iterations.push_back(std::move(record));
    return IterationOutcome::Stopped;
  }

  struct PromptSlot {
    std::optional<PlanePrompt> prompt;
    std::string status = "skipped";
    std::string reason;
    std::optional<CandidateStep> candidate;
  };
  std::vector<PromptSlot> slots(planes.size());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (static_cast<int>(planes[i].inliers.size()) < config.prompt_size) {
      slots[i].reason = "fewer inliers than the prompt size";
      continue;
    }
    slots[i].prompt = sample_prompt(planes[i], ref.cloud, config.prompt_size,
                                    iter_seed(config, state.t, kSaltPrompt + i));
    slots[i].status = "failed";  // until a candidate materializes
  }

  parallel_for(slots.size(), config.threads, [&](std::size_t i) {
    if (!slots[i].prompt) return;
    slots[i].candidate =
        reconstruct_step(*slots[i].prompt, ref, p_full, p_full_tree, state.solid, config.fit,
                         iter_seed(config, state.t, kSaltCandidate + i));
    if (slots[i].candidate)
      slots[i].status = "candidate";
    else
      slots[i].reason = "no candidate from this prompt";
  });

  std::vector<CandidateStep> candidates;
  std::vector<std::size_t> slot_of_candidate;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].candidate) {
      slot_of_candidate.push_back(i);
      candidates.push_back(*slots[i].candidate);
    }
  }

  json prompts_json = json::array();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    json pj = {{"plane_index", i}, {"status", slots[i].status}};
    if (!slots[i].reason.empty()) pj["reason"] = slots[i].reason;
    if (slots[i].prompt) pj["prompt"] = slots[i].prompt->to_json();
    prompts_json.push_back(std::move(pj));
  }
  record["prompts"] = prompts_json;

  if (candidates.empty()) {
    state.stop_reason = "no-candidates";
    record["stop"] = state.stop_reason;
    state.iterations.push_back(std::move(record));
    return IterationOutcome::Stopped;
  }

  SelectionResult sel =
      select(candidates, config.strategy, state.solid, p_full, p_full_tree,
             iter_seed(config, state.t, kSaltSelect), config.geo_samples);

  json candidates_json = json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates_json.push_back({{"prompt_index", slot_of_candidate[i]},
                               {"step", to_json(candidates[i].step)},
                               {"score", sel.scores[i]},
                               {"diagnostics", candidates[i].diag.to_json()}});
  }
  record["candidates"] = candidates_json;
  record["strategy"] = strategy_name(config.strategy);

  // acceptance gate: the selected candidate must reduce the chamfer
  // distance; otherwise the next-ranked one gets a try, then we stop
  json decision;
  IterationOutcome outcome = IterationOutcome::Stopped;
  int tried = 0;
  json attempts = json::array();
  for (std::size_t rank = 0; rank < sel.ranking.size() && tried < 2; ++rank, ++tried) {
    int ci = sel.ranking[rank];
    const CandidateStep& cand = candidates[ci];
    Solid trial = state.solid;
    trial.add_step(cand.step.sketch, cand.step.extrusion, cand.step.op, config.fit.chord_tol);
    double new_cd;
    PointCloud new_prev;
    try {
      new_prev = trial.sample_surface(config.n_points,
                                      iter_seed(config, state.t, kSaltAccept + rank));
      new_cd = chamfer(new_prev, p_full, p_full_tree);
    } catch (const Error& e) {
      attempts.push_back({{"candidate", ci}, {"outcome", "execution-failed"},
                          {"reason", e.what()}});
      continue;
    }
    bool improves = state.cd - new_cd >= config.min_cd_improvement;
    attempts.push_back(
        {{"candidate", ci}, {"cd_if_accepted", new_cd}, {"outcome", improves ? "accepted" : "rejected"}});
    if (!improves) continue;

    state.seq.steps.push_back(cand.step);
    state.solid = std::move(trial);
    state.p_prev = std::move(new_prev);
    state.cd = new_cd;
    state.cd_history.push_back(new_cd);
    state.t += 1;
    decision = {{"selected", ci}, {"cd_after", new_cd}};
    outcome = IterationOutcome::Accepted;
    break;
  }
  record["attempts"] = attempts;

  if (outcome == IterationOutcome::Stopped) {
    state.stop_reason = "no-improvement";
    record["stop"] = state.stop_reason;
  } else {
    record["decision"] = decision;
    if (state.cd <= config.stop_cd)
      state.stop_reason = "cd-threshold";
    else if (state.t >= config.max_steps)
      state.stop_reason = "max-steps";
    if (!state.stop_reason.empty()) record["stop"] = state.stop_reason;
  }
  state.iterations.push_back(std::move(record));
  return outcome;
}

PipelineResult run(const PointCloud& p_full, const PipelineConfig& config,
                   const IterationDump& dump) {
  if (p_full.empty()) throw DegenerateInputError("reconstruction needs a nonempty cloud");
  KdTree3 p_full_tree(p_full.positions);

  ReconState state;
  while (state.stop_reason.empty()) {
    IterationOutcome outcome = iterate_once(state, p_full, p_full_tree, config);
    if (outcome == IterationOutcome::Accepted && dump)
      dump(state.t - 1, state.solid, state.last_ref);
    if (outcome == IterationOutcome::Stopped) break;
  }

  json trace = {{"config", config.to_json()}, {"iterations", state.iterations}};

  if (state.seq.empty()) {
    trace["result"] = {{"steps", 0}, {"stop_reason", state.stop_reason}, {"valid", false}};
    throw InvalidReconstructionError("no candidate step ever executed", trace.dump(2));
  }

  // best intermediate state by chamfer distance (monotone under the
  // acceptance gate, so normally the final state)
  std::size_t best = 0;
  for (std::size_t i = 1; i < state.cd_history.size(); ++i)
    if (state.cd_history[i] < state.cd_history[best]) best = i;

  PipelineResult result;
  result.sequence = state.seq.prefix(best + 1);
  result.final_cd = state.cd_history[best];
  result.iterations = state.t;
  result.stop_reason = state.stop_reason;
  trace["result"] = {{"steps", result.sequence.size()},
                     {"cd", result.final_cd},
                     {"stop_reason", result.stop_reason},
                     {"valid", true}};
  result.trace = std::move(trace);
  return result;
}

}  // namespace cadrec
