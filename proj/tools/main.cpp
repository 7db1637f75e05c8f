// cadrec command line tool: execute and sample modeling sequences,
// reconstruct sequences from point clouds, detect planes, run batch
// evaluation and dump finite-difference checks of the loss functions.
//
// Exit codes: 0 success, 1 internal error, 2 input error, 3 domain error
// (invalid sequence / empty solid / failed reconstruction).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cadrec/dsl.hpp"
#include "cadrec/dsl_io.hpp"
#include "cadrec/errors.hpp"
#include "cadrec/guidance.hpp"
#include "cadrec/losses.hpp"
#include "cadrec/mesh.hpp"
#include "cadrec/metrics.hpp"
#include "cadrec/pipeline.hpp"
#include "cadrec/pointcloud.hpp"
#include "cadrec/rng.hpp"
#include "cadrec/solid.hpp"
#include "cadrec/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

cadrec::CadSequence load_sequence_any(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  if (ext == ".json") return cadrec::load_sequence_json(path);
  if (ext == ".tokens" || ext == ".txt")
    return cadrec::load_token_text(path, cadrec::TokenAlphabet::standard());
  throw cadrec::InputError("unsupported sequence extension '" + ext + "'");
}

int threads_from_env() {
  const char* env = std::getenv("CADREC_THREADS");
  if (!env) return 1;
  int v = std::atoi(env);
  return v > 0 ? v : 1;
}

struct CommonOpts {
  std::uint64_t seed = 0;
  int threads = threads_from_env();
  std::string config_path;
  bool verbose = false;
};

cadrec::PipelineConfig resolve_pipeline_config(const CommonOpts& common,
                                               const std::string& strategy, int n_points) {
  cadrec::PipelineConfig cfg;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw cadrec::InputError("cannot open config '" + common.config_path + "'");
    json j;
    in >> j;
    cfg = cadrec::PipelineConfig::from_json(j);
  }
  if (!strategy.empty()) cfg.strategy = cadrec::strategy_from_name(strategy);
  if (n_points > 0) cfg.n_points = n_points;
  cfg.seed = common.seed;
  cfg.threads = common.threads;
  return cfg;
}

int cmd_execute(const std::string& seq_path, const std::string& obj_path, int res,
                const CommonOpts& common) {
  cadrec::CadSequence seq = load_sequence_any(seq_path);
  auto violations = cadrec::validate(seq);
  json report = {{"input", seq_path}, {"steps", seq.size()}, {"violations", json::array()}};
  for (const auto& v : violations)
    report["violations"].push_back({{"where", v.where}, {"message", v.message}});
  if (!violations.empty()) {
    report["valid"] = false;
    std::cout << report.dump(2) << "\n";
    return kExitDomain;
  }
  cadrec::Solid solid = cadrec::Solid::from_sequence(seq);
  cadrec::TriMesh mesh = cadrec::extract_isosurface(solid, res);
  if (!obj_path.empty()) {
    json cfg = {{"command", "execute"}, {"input", seq_path}, {"res", res},
                {"seed", common.seed}};
    cadrec::save_obj(obj_path, mesh, {"cadrec config " + cfg.dump()});
    report["obj"] = obj_path;
  }
  report["valid"] = true;
  report["mesh_vertices"] = mesh.vertices.size();
  report["mesh_triangles"] = mesh.triangles.size();
  report["mesh_volume"] = cadrec::mesh_volume(mesh);
  std::cout << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_sample(const std::string& seq_path, const std::string& out_path, int n,
               const CommonOpts& common) {
  cadrec::CadSequence seq = load_sequence_any(seq_path);
  auto violations = cadrec::validate(seq);
  if (!violations.empty()) {
    std::cerr << "invalid sequence: " << violations[0].where << ": " << violations[0].message
              << "\n";
    return kExitDomain;
  }
  cadrec::Solid solid = cadrec::Solid::from_sequence(seq);
  cadrec::PointCloud cloud = solid.sample_surface(n, common.seed);
  json cfg = {{"command", "sample"}, {"input", seq_path}, {"n", n}, {"seed", common.seed}};
  cadrec::save_ply(out_path, cloud, {"cadrec config " + cfg.dump()});
  std::cout << "wrote " << cloud.size() << " points to " << out_path << "\n";
  return kExitOk;
}

int cmd_reconstruct(const std::string& cloud_path, const std::string& out_path,
                    const std::string& trace_dir, const std::string& strategy, int n_points,
                    bool dump_steps, const CommonOpts& common) {
  cadrec::PointCloud p_full = cadrec::load_cloud(cloud_path);
  cadrec::PipelineConfig cfg = resolve_pipeline_config(common, strategy, n_points);

  if (!trace_dir.empty()) fs::create_directories(trace_dir);
  cadrec::IterationDump dump;
  if (dump_steps && !trace_dir.empty()) {
    dump = [&](int t, const cadrec::Solid& partial, const cadrec::PointCloud& ref) {
      cadrec::TriMesh mesh = cadrec::extract_isosurface(partial, 96);
      cadrec::save_obj(trace_dir + "/step_" + std::to_string(t) + ".obj", mesh);
      cadrec::save_ply(trace_dir + "/ref_" + std::to_string(t) + ".ply", ref);
    };
  }

  try {
    cadrec::PipelineResult result = cadrec::run(p_full, cfg, dump);
    cadrec::save_sequence_json(out_path, result.sequence);
    if (!trace_dir.empty())
      cadrec::write_file_atomic(trace_dir + "/trace.json", result.trace.dump(2) + "\n");
    std::cout << "reconstructed " << result.sequence.size() << " step(s), cd "
              << result.final_cd << " (x100: " << result.final_cd * 100.0 << "), stop: "
              << result.stop_reason << "\n";
    return kExitOk;
  } catch (const cadrec::InvalidReconstructionError& e) {
    if (!trace_dir.empty())
      cadrec::write_file_atomic(trace_dir + "/trace.json", e.trace_json + "\n");
    std::cerr << "reconstruction failed: " << e.what() << "\n";
    return kExitDomain;
  }
}

int cmd_detect_planes(const std::string& cloud_path, const std::string& out_path, double t,
                      int d, int max_planes, const CommonOpts& common) {
  cadrec::PointCloud cloud = cadrec::load_cloud(cloud_path);
  cadrec::RansacParams params;
  params.t = t;
  params.min_inliers = d;
  params.max_planes = max_planes;
  auto planes = cadrec::detect_planes(cloud, params, common.seed);
  json out = {{"config",
               {{"t", t}, {"d", d}, {"max_planes", max_planes}, {"seed", common.seed},
                {"input", cloud_path}}},
              {"planes", json::array()}};
  for (const auto& p : planes) out["planes"].push_back(p.to_json(true));
  if (out_path.empty())
    std::cout << out.dump(2) << "\n";
  else
    cadrec::write_file_atomic(out_path, out.dump(2) + "\n");
  std::cerr << "detected " << planes.size() << " plane(s)\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& pred_dir, const std::string& gt_dir,
                 const std::string& out_path, const std::string& csv_path, int samples,
                 const CommonOpts& common) {
  std::map<std::string, std::string> preds, gts;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    std::string ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".tokens" || ext == ".txt")
      preds[entry.path().stem().string()] = entry.path().string();
  }
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    std::string ext = entry.path().extension().string();
    if (ext == ".json" || ext == ".ply" || ext == ".xyz")
      gts[entry.path().stem().string()] = entry.path().string();
  }
  if (gts.empty()) throw cadrec::InputError("no ground truth files in '" + gt_dir + "'");

  std::vector<std::string> unmatched;
  std::vector<cadrec::EvalPair> pairs;
  for (const auto& [id, gt_path] : gts) {
    cadrec::EvalPair pair;
    pair.id = id;
    std::string ext = fs::path(gt_path).extension().string();
    if (ext == ".json")
      pair.gt = cadrec::load_sequence_json(gt_path);
    else
      pair.gt = cadrec::load_cloud(gt_path);
    auto it = preds.find(id);
    if (it != preds.end())
      pair.prediction = load_sequence_any(it->second);
    else
      unmatched.push_back(id);
    pairs.push_back(std::move(pair));
  }

  cadrec::EvalConfig cfg;
  cfg.samples = samples;
  cfg.seed = common.seed;
  cadrec::MetricsReport report = cadrec::evaluate_dataset(pairs, cfg);
  json out = report.to_json();
  out["unmatched_ids"] = unmatched;
  cadrec::write_file_atomic(out_path, out.dump(2) + "\n");
  if (!csv_path.empty()) cadrec::write_file_atomic(csv_path, report.to_csv());
  std::cout << out["aggregate"].dump(2) << "\n";
  if (!unmatched.empty())
    std::cerr << unmatched.size() << " ground truth model(s) had no prediction\n";
  return kExitOk;
}

int cmd_synth(const std::string& cloud_path, const std::string& seq_path, int steps, int n,
              const CommonOpts& common) {
  cadrec::SyntheticModel model = cadrec::generate_synthetic(common.seed, steps, n);
  json cfg = {{"command", "synth"}, {"steps", steps}, {"n", n}, {"seed", common.seed}};
  if (!cloud_path.empty()) cadrec::save_ply(cloud_path, model.cloud, {"cadrec config " + cfg.dump()});
  if (!seq_path.empty()) cadrec::save_sequence_json(seq_path, model.seq);
  std::cout << "generated " << model.seq.size() << " step(s), " << model.cloud.size()
            << " surface points\n";
  return kExitOk;
}

// Finite-difference check of the differentiable-loss gradient path.
int cmd_fdcheck(const std::string& out_path, int draws, const CommonOpts& common) {
  cadrec::Rng rng(common.seed);
  auto random_params = [&]() {
    cadrec::SoftParams p;
    p.sketch_min = {rng.uniform(0.0, 0.4), rng.uniform(0.0, 0.4)};
    p.sketch_max = {p.sketch_min.x + rng.uniform(0.3, 0.6),
                    p.sketch_min.y + rng.uniform(0.3, 0.6)};
    p.d_minus = rng.uniform(-0.4, 0.0);
    p.d_plus = p.d_minus + rng.uniform(0.15, 0.5);
    p.translation = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    p.theta = rng.uniform(-1.2, 1.2);
    p.phi = rng.uniform(-1.2, 1.2);
    p.rho = rng.uniform(-1.2, 1.2);
    p.scale = rng.uniform(0.5, 1.5);
    return p;
  };

  json rows = json::array();
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    cadrec::SoftParams pred = random_params();
    cadrec::SoftParams gt = pred;
    // nearby ground truth keeps the boxes overlapping
    gt.translation += {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                       rng.uniform(-0.05, 0.05)};
    auto grad = cadrec::l_bbox_gradient(pred, gt);
    double max_rel = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < cadrec::SoftParams::kCount; ++i) {
      cadrec::SoftParams lo = pred, hi = pred;
      lo.set(i, pred.get(i) - h);
      hi.set(i, pred.get(i) + h);
      double fd = (cadrec::l_bbox_smooth(hi, gt) - cadrec::l_bbox_smooth(lo, gt)) / (2 * h);
      double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - grad[i]) / denom);
    }
    worst = std::max(worst, max_rel);
    rows.push_back({{"draw", k}, {"max_rel_error", max_rel},
                    {"l_bbox", cadrec::l_bbox(pred, gt)},
                    {"l_bbox_smooth", cadrec::l_bbox_smooth(pred, gt)}});
  }
  json out = {{"config", {{"draws", draws}, {"seed", common.seed}, {"h", 1e-5}}},
              {"worst_rel_error", worst},
              {"pass", worst < 1e-4},
              {"draws", rows}};
  if (out_path.empty())
    std::cout << out.dump(2) << "\n";
  else
    cadrec::write_file_atomic(out_path, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sketch-extrude reconstruction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  CommonOpts common;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads (default CADREC_THREADS or 1)");
  app.add_option("--config", common.config_path, "JSON file with pipeline config overrides");
  app.add_flag("-v,--verbose", common.verbose, "verbose output");

  // execute
  auto* exec = app.add_subcommand("execute", "validate a sequence and export its mesh");
  std::string exec_in, exec_obj;
  int exec_res = 128;
  exec->add_option("sequence", exec_in, "sequence .json or .tokens")->required();
  exec->add_option("--obj", exec_obj, "output OBJ path");
  exec->add_option("--res", exec_res, "isosurface resolution")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "sample surface points of a sequence");
  std::string sample_in, sample_out = "out.ply";
  int sample_n = 8192;
  sample->add_option("sequence", sample_in)->required();
  sample->add_option("-o,--out", sample_out, "output PLY path")->capture_default_str();
  sample->add_option("-n", sample_n, "point count")->capture_default_str();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "reconstruct a sequence from a point cloud");
  std::string rec_in, rec_out = "reconstructed.json", rec_trace, rec_strategy = "geo";
  int rec_n = 0;
  bool rec_dump = false;
  rec->add_option("cloud", rec_in, "input .ply or .xyz cloud")->required();
  rec->add_option("-o,--out", rec_out, "output sequence JSON")->capture_default_str();
  rec->add_option("--trace", rec_trace, "trace output directory");
  rec->add_option("--strategy", rec_strategy, "geo | heur | rand")->capture_default_str();
  rec->add_option("-n", rec_n, "resample count for intermediate states");
  rec->add_flag("--dump-steps", rec_dump, "write per-step OBJ/PLY into the trace directory");

  // detect-planes
  auto* planes = app.add_subcommand("detect-planes", "RANSAC plane detection on a cloud");
  std::string planes_in, planes_out;
  double planes_t = 1e-3;
  int planes_d = 128, planes_max = 8;
  planes->add_option("cloud", planes_in)->required();
  planes->add_option("-o,--out", planes_out, "output JSON (stdout when omitted)");
  planes->add_option("--t", planes_t, "inlier distance threshold")->capture_default_str();
  planes->add_option("--d", planes_d, "min inliers per plane")->capture_default_str();
  planes->add_option("--max-planes", planes_max)->capture_default_str();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "batch-evaluate predictions against ground truth");
  std::string eval_pred, eval_gt, eval_out = "report.json", eval_csv;
  int eval_samples = 16382;
  eval->add_option("--pred", eval_pred, "directory of predicted sequences")->required();
  eval->add_option("--gt", eval_gt, "directory of ground truth (.json/.ply)")->required();
  eval->add_option("--out", eval_out, "report JSON path")->capture_default_str();
  eval->add_option("--csv", eval_csv, "report CSV path");
  eval->add_option("--samples", eval_samples, "points per side")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic model");
  std::string synth_cloud = "synthetic.ply", synth_seq = "synthetic.json";
  int synth_steps = 2, synth_n = 8192;
  synth->add_option("-o,--out", synth_cloud, "output PLY path")->capture_default_str();
  synth->add_option("--seq", synth_seq, "output sequence JSON path")->capture_default_str();
  synth->add_option("--steps", synth_steps, "modeling step count")->capture_default_str();
  synth->add_option("-n", synth_n, "surface point count")->capture_default_str();

  // fdcheck
  auto* fd = app.add_subcommand("fdcheck", "finite-difference check of the loss gradients");
  std::string fd_out;
  int fd_draws = 100;
  fd->add_option("-o,--out", fd_out, "report JSON path (stdout when omitted)");
  fd->add_option("--draws", fd_draws, "random parameter draws")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (exec->parsed()) return cmd_execute(exec_in, exec_obj, exec_res, common);
    if (sample->parsed()) return cmd_sample(sample_in, sample_out, sample_n, common);
    if (rec->parsed())
      return cmd_reconstruct(rec_in, rec_out, rec_trace, rec_strategy, rec_n, rec_dump, common);
    if (planes->parsed())
      return cmd_detect_planes(planes_in, planes_out, planes_t, planes_d, planes_max, common);
    if (eval->parsed())
      return cmd_evaluate(eval_pred, eval_gt, eval_out, eval_csv, eval_samples, common);
    if (synth->parsed()) return cmd_synth(synth_cloud, synth_seq, synth_steps, synth_n, common);
    if (fd->parsed()) return cmd_fdcheck(fd_out, fd_draws, common);
  } catch (const cadrec::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const cadrec::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const cadrec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
