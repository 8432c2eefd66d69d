// rigfit command-line front end: fit, transfer, deform, eval, resample and
// export-weights workflows over directories of OBJ frames.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rigfit/error.hpp"
#include "rigfit/fitter.hpp"
#include "rigfit/io.hpp"
#include "rigfit/metrics.hpp"
#include "rigfit/sampling.hpp"

namespace fs = std::filesystem;

namespace {

/// Fit options shared by fit, transfer and protocol-mode eval. Values are
/// layered: built-in defaults, then --config, then explicit flags.
struct FitFlags {
  rigfit::FitConfig base;
  rigfit::FitConfig cfg;
  std::string config_path;
  CLI::Option* bones = nullptr;
  CLI::Option* iterations = nullptr;
  CLI::Option* lr_rig = nullptr;
  CLI::Option* lr_motion = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* tau_fraction = nullptr;
  CLI::Option* top_k = nullptr;
  CLI::Option* grad_clip = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* jitter = nullptr;
  CLI::Option* log_every = nullptr;
  CLI::Option* no_refine = nullptr;
  double tau_value = 0.0;
  bool no_refine_flag = false;

  void add_to(CLI::App* cmd, bool rig_options) {
    cmd->add_option("--config", config_path, "Structured-text config file; flags take precedence")
        ->check(CLI::ExistingFile);
    iterations = cmd->add_option("--iters", cfg.iterations, "Adam iterations")->capture_default_str();
    lr_motion = cmd->add_option("--lr-motion", cfg.lr_motion, "Motion learning rate")->capture_default_str();
    grad_clip = cmd->add_option("--grad-clip", cfg.grad_clip, "Global gradient-norm clip (<= 0 disables)")
                    ->capture_default_str();
    seed = cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    log_every = cmd->add_option("--log-every", cfg.log_every, "Loss logging cadence")->capture_default_str();
    if (rig_options) {
      bones = cmd->add_option("--bones", cfg.bones, "Number of Gaussian bones K")->capture_default_str();
      lr_rig = cmd->add_option("--lr-rig", cfg.lr_rig, "Rig learning rate")->capture_default_str();
      tau = cmd->add_option("--tau", tau_value, "Absolute coherence radius (default: fraction of bbox diagonal)");
      tau_fraction = cmd->add_option("--tau-fraction", cfg.tau_fraction, "Coherence radius / bbox diagonal")
                         ->capture_default_str();
      top_k = cmd->add_option("--ks", cfg.top_k, "Bones kept per vertex")->capture_default_str();
      jitter = cmd->add_option("--init-jitter", cfg.init_jitter, "Seeded initial centre perturbation")
                   ->capture_default_str();
      no_refine = cmd->add_flag("--no-refine", no_refine_flag, "Disable geodesic weight refinement");
    }
  }

  static bool given(const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; }

  rigfit::FitConfig resolve() const {
    rigfit::FitConfig out = base;
    if (!config_path.empty()) {
      out = rigfit::io::parse_fit_config(rigfit::io::read_file(config_path), out);
    }
    if (given(bones)) out.bones = cfg.bones;
    if (given(iterations)) out.iterations = cfg.iterations;
    if (given(lr_rig)) out.lr_rig = cfg.lr_rig;
    if (given(lr_motion)) out.lr_motion = cfg.lr_motion;
    if (given(tau)) out.tau = tau_value;
    if (given(tau_fraction)) out.tau_fraction = cfg.tau_fraction;
    if (given(top_k)) out.top_k = cfg.top_k;
    if (given(grad_clip)) out.grad_clip = cfg.grad_clip;
    if (given(seed)) out.seed = cfg.seed;
    if (given(jitter)) out.init_jitter = cfg.init_jitter;
    if (given(log_every)) out.log_every = cfg.log_every;
    if (given(no_refine)) out.geodesic_refinement = !no_refine_flag;
    return out;
  }
};

int run_fit(const std::string& frames, const FitFlags& flags, const std::string& out_rig, const std::string& out_motion,
            const std::string& report_path) {
  const rigfit::MeshSequence seq = rigfit::io::load_sequence(frames);
  const rigfit::FitConfig cfg = flags.resolve();
  const rigfit::FitResult fit = rigfit::fit_rig_and_motion(seq, cfg);
  rigfit::io::save_rig(out_rig, rigfit::io::make_rig_file(fit.rig, fit.weights, seq.canonical()));
  rigfit::io::save_motion(out_motion, rigfit::io::make_motion_file(fit.motion, fit.rig));
  if (!report_path.empty()) {
    rigfit::io::save_fit_report(report_path, fit.report);
  }
  std::cerr << "fit: final loss " << fit.report.final_loss << " after " << cfg.iterations << " iterations ("
            << fit.report.wall_seconds << " s)\n";
  return 0;
}

int run_transfer(const std::string& rig_path, const std::string& frames, const FitFlags& flags,
                 const std::string& out_motion, const std::string& report_path) {
  const rigfit::io::RigFile file = rigfit::io::load_rig(rig_path);
  const rigfit::MeshSequence seq = rigfit::io::load_sequence(frames);
  if (file.source.faces != seq.faces.size()) {
    throw rigfit::TopologyMismatch("rig was fitted on a mesh with " + std::to_string(file.source.faces) +
                                   " faces; the sequence has " + std::to_string(seq.faces.size()));
  }
  rigfit::FitConfig cfg = flags.resolve();
  const rigfit::RigParams rig = rigfit::io::to_rig_params(file);
  cfg.bones = rig.bone_count();
  const rigfit::MotionFitResult result = rigfit::fit_motion_only(rig, file.weights.vertex_count(), seq, cfg);
  rigfit::io::save_motion(out_motion, rigfit::io::make_motion_file(result.motion, rig.reanchored(seq.frames.front())));
  if (!report_path.empty()) {
    rigfit::io::save_fit_report(report_path, result.report);
  }
  std::cerr << "transfer: final loss " << result.report.final_loss << "\n";
  return 0;
}

int run_deform(const std::string& rig_path, const std::string& motion_path, const std::string& canonical_path,
               const std::string& out_dir, bool force) {
  const rigfit::io::RigFile rig = rigfit::io::load_rig(rig_path);
  const rigfit::io::MotionFile motion = rigfit::io::load_motion(motion_path);
  const rigfit::TriMesh canonical = rigfit::io::load_obj(canonical_path);
  rigfit::io::check_fingerprint(rig, canonical, force);
  if (motion.bone_count != rig.bone_count()) {
    throw rigfit::InvalidInput("motion file has " + std::to_string(motion.bone_count) + " bones, rig has " +
                               std::to_string(rig.bone_count()));
  }
  rigfit::MeshSequence out;
  out.faces = canonical.faces;
  out.frames.push_back(canonical.vertices);
  for (const auto& frame : motion.frames) {
    out.frames.push_back(rigfit::lbs_deform(canonical.vertices, rig.weights, frame));
  }
  rigfit::io::save_sequence(out_dir, out);
  return 0;
}

int run_eval_pair(const std::string& pred_dir, const std::string& target_dir, const std::string& report_path) {
  const rigfit::MeshSequence pred = rigfit::io::load_sequence(pred_dir);
  const rigfit::MeshSequence target = rigfit::io::load_sequence(target_dir);
  if (pred.frame_count() != target.frame_count() || pred.vertex_count() != target.vertex_count()) {
    throw rigfit::TopologyMismatch("prediction and target sequences differ in frame or vertex count");
  }
  // Frame 0 is the shared canonical pose; metrics cover reconstructed frames.
  const rigfit::Frames p(pred.frames.begin() + 1, pred.frames.end());
  const rigfit::Frames t(target.frames.begin() + 1, target.frames.end());
  rigfit::EvalReport report;
  report.sequence = rigfit::evaluate_frames(p, t);
  report.aggregates["sequence.cd_l1"] = {report.sequence->mean_cd_l1, 0.0};
  report.aggregates["sequence.cd_l2"] = {report.sequence->mean_cd_l2, 0.0};
  report.aggregates["sequence.mse"] = {report.sequence->mean_mse, 0.0};
  if (!report_path.empty()) {
    rigfit::io::save_eval_report(report_path, report);
  }
  std::printf("cd_l1 %.17g\ncd_l2 %.17g\nmse %.17g\n", report.sequence->mean_cd_l1, report.sequence->mean_cd_l2,
              report.sequence->mean_mse);
  return 0;
}

int run_eval_protocol(const std::string& train_dir, const std::string& test_dir, std::size_t splits,
                      const FitFlags& flags, const std::string& report_path) {
  const rigfit::MeshSequence train = rigfit::io::load_sequence(train_dir);
  const rigfit::MeshSequence test = rigfit::io::load_sequence(test_dir);
  const rigfit::EvalReport report = rigfit::run_protocol(train, test, flags.resolve(), splits);
  if (!report_path.empty()) {
    rigfit::io::save_eval_report(report_path, report);
  }
  for (const auto& [key, ms] : report.aggregates) {
    std::printf("%s %.6g +- %.3g\n", key.c_str(), ms.mean, ms.stddev);
  }
  return 0;
}

int run_resample(const std::string& frames, std::size_t target, const std::string& out_dir) {
  const rigfit::MeshSequence seq = rigfit::io::load_sequence(frames);
  const rigfit::NormalizedSequence out = rigfit::normalize_resolution(seq, target);
  rigfit::io::save_sequence(out_dir, out.sequence);
  std::cerr << "resample: " << seq.vertex_count() << " -> " << out.sequence.vertex_count() << " vertices, "
            << out.map.proxy_graph.edge_count() << " proxy edges\n";
  return 0;
}

int run_export(const std::string& rig_path, const std::string& canonical_path, const std::string& out, bool force) {
  const rigfit::io::RigFile rig = rigfit::io::load_rig(rig_path);
  const rigfit::TriMesh canonical = rigfit::io::load_obj(canonical_path);
  rigfit::io::check_fingerprint(rig, canonical, force);
  rigfit::io::export_weights_visualization(rig, canonical, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigfit: Gaussian-bone rig and motion fitting for deforming mesh sequences"};
  app.require_subcommand(1);

  std::string frames, out_rig, out_motion, report, rig_path, motion_path, canonical, out_dir, out_file;
  std::string pred, target, train, test;
  std::size_t splits = rigfit::kDefaultSplits;
  std::size_t target_n = rigfit::kDefaultTargetVertices;
  bool force = false;

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Jointly fit a Gaussian-bone rig and per-frame motion");
  fit->add_option("--frames", frames, "Directory of per-frame OBJ meshes")->required();
  fit->add_option("--out-rig", out_rig, "Output rig file")->required();
  fit->add_option("--out-motion", out_motion, "Output motion file")->required();
  fit->add_option("--report", report, "Output fit report");
  fit_flags.add_to(fit, true);

  FitFlags transfer_flags;
  auto* transfer = app.add_subcommand("transfer", "Fit only per-frame motion under a frozen rig");
  transfer->add_option("--rig", rig_path, "Rig file")->required();
  transfer->add_option("--frames", frames, "Directory of per-frame OBJ meshes")->required();
  transfer->add_option("--out-motion", out_motion, "Output motion file")->required();
  transfer->add_option("--report", report, "Output fit report");
  transfer_flags.add_to(transfer, false);

  auto* deform = app.add_subcommand("deform", "Apply a rig and motion to a canonical mesh");
  deform->add_option("--rig", rig_path, "Rig file")->required();
  deform->add_option("--motion", motion_path, "Motion file")->required();
  deform->add_option("--canonical", canonical, "Canonical OBJ mesh")->required();
  deform->add_option("--out-dir", out_dir, "Directory for the deformed frames")->required();
  deform->add_flag("--force", force, "Skip the mesh fingerprint check");

  FitFlags eval_flags;
  // Splits differ only through the seeded start, so protocol mode jitters by default.
  eval_flags.base.init_jitter = 0.05;
  eval_flags.cfg.init_jitter = eval_flags.base.init_jitter;
  auto* eval = app.add_subcommand("eval", "Chamfer / vertex-error evaluation or the train/transfer protocol");
  auto* pred_opt = eval->add_option("--pred", pred, "Predicted frames directory");
  auto* target_opt = eval->add_option("--target", target, "Target frames directory");
  auto* train_opt = eval->add_option("--train", train, "Training sequence directory (protocol mode)");
  auto* test_opt = eval->add_option("--test", test, "Test sequence directory (protocol mode)");
  eval->add_option("--splits", splits, "Independent random splits")->capture_default_str();
  eval->add_option("--report", report, "Output evaluation report");
  pred_opt->needs(target_opt);
  target_opt->needs(pred_opt);
  train_opt->needs(test_opt);
  test_opt->needs(train_opt);
  pred_opt->excludes(train_opt);
  eval_flags.add_to(eval, true);

  auto* resample = app.add_subcommand("resample", "Normalize a sequence to a fixed vertex count");
  resample->add_option("--frames", frames, "Directory of per-frame OBJ meshes")->required();
  resample->add_option("--target-n", target_n, "Target vertex count")->capture_default_str();
  resample->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* export_cmd = app.add_subcommand("export-weights", "Colour vertices by their dominant bone (ASCII PLY)");
  export_cmd->add_option("--rig", rig_path, "Rig file")->required();
  export_cmd->add_option("--canonical", canonical, "Canonical OBJ mesh")->required();
  export_cmd->add_option("--out", out_file, "Output PLY file")->required();
  export_cmd->add_flag("--force", force, "Skip the mesh fingerprint check");

  try {
    app.parse(argc, argv);
    if (*eval && pred.empty() && train.empty()) {
      throw CLI::RequiredError("eval needs --pred/--target or --train/--test");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) return run_fit(frames, fit_flags, out_rig, out_motion, report);
    if (*transfer) return run_transfer(rig_path, frames, transfer_flags, out_motion, report);
    if (*deform) return run_deform(rig_path, motion_path, canonical, out_dir, force);
    if (*eval) {
      if (!pred.empty()) return run_eval_pair(pred, target, report);
      return run_eval_protocol(train, test, splits, eval_flags, report);
    }
    if (*resample) return run_resample(frames, target_n, out_dir);
    if (*export_cmd) return run_export(rig_path, canonical, out_file, force);
  } catch (const std::exception& e) {
    std::cerr << "rigfit: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
