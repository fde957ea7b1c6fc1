// Copyright 2026 The ARC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// arc: continual-learning detection experiments on synthetic scenes.
//
// Subcommands:
//   pretrain   train the base detector and write a checkpoint
//   adapt      adapt a pretrained checkpoint (finetune | joint | arc)
//   eval       evaluate a checkpoint on a data split
//   report     compose eval reports from several runs into one table
//   gradcheck  finite-difference validation of every differentiable op
//
// Exit codes: 0 success, 1 validation/argument error, 2 numerical failure,
// 3 I/O error.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arc/checkpoint.hpp"
#include "arc/config.hpp"
#include "arc/eval_runner.hpp"
#include "arc/gradcheck.hpp"
#include "arc/metrics.hpp"
#include "arc/model.hpp"
#include "arc/rng.hpp"
#include "arc/synth.hpp"
#include "arc/trainer.hpp"

#ifndef ARC_BUILD_ID
#define ARC_BUILD_ID "unknown"
#endif

namespace arc {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

// ---- run manifest ----------------------------------------------------------

std::uint64_t file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot digest " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

// Timestamps live only here; every other artifact is byte-reproducible.
// Eval invocations write their own manifest file so they never clobber the
// run manifest of the directory they add artifacts to.
void write_manifest(const fs::path& out_dir, const std::string& mode,
                    std::uint64_t seed, const std::string& config_path,
                    const std::vector<std::string>& artifacts,
                    const std::string& filename = "manifest.txt") {
  std::ofstream m(out_dir / filename, std::ios::trunc);
  if (!m) throw IoError("cannot write manifest under " + out_dir.string());
  m << "mode=" << mode << "\n";
  m << "seed=" << seed << "\n";
  m << "config=" << (config_path.empty() ? "<defaults>" : config_path) << "\n";
  m << "build=" << ARC_BUILD_ID << "\n";
  const std::time_t now = std::time(nullptr);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m << "created=" << stamp << "\n";
  for (const std::string& a : artifacts) {
    char line[512];
    std::snprintf(line, sizeof(line), "artifact=%016llx  %s\n",
                  static_cast<unsigned long long>(file_digest(out_dir / a)),
                  a.c_str());
    m << line;
  }
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw IoError("missing manifest.txt in " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// ---- dataset assembly ------------------------------------------------------

std::vector<int> base_class_ids() { return {0, 1, 2}; }
std::vector<int> task_class_ids() { return {kTaskClassId}; }
std::vector<int> all_class_ids() { return {0, 1, 2, kTaskClassId}; }

EvalOptions eval_options(const RunConfig& cfg, bool veto) {
  EvalOptions opts;
  opts.decode_conf = cfg.decode_conf;
  opts.nms_iou = cfg.nms_iou;
  opts.veto = veto;
  opts.veto_cfg = cfg.veto;
  return opts;
}

void write_eval_files(const fs::path& out_dir, const std::string& stem,
                      const DatasetEval& ev) {
  {
    std::ofstream f(out_dir / (stem + "_report.txt"), std::ios::trunc);
    if (!f) throw IoError("cannot write " + stem + "_report.txt");
    write_report_text(f, ev.report);
  }
  {
    std::ofstream f(out_dir / (stem + ".csv"), std::ios::trunc);
    if (!f) throw IoError("cannot write " + stem + ".csv");
    write_report_csv(f, ev.report);
  }
  {
    std::ofstream f(out_dir / (stem + "_detections.tsv"), std::ios::trunc);
    if (!f) throw IoError("cannot write " + stem + "_detections.tsv");
    write_detections(f, ev.detections);
  }
  {
    std::ofstream f(out_dir / (stem + "_gt.tsv"), std::ios::trunc);
    if (!f) throw IoError("cannot write " + stem + "_gt.tsv");
    write_groundtruth(f, ev.ground_truth);
  }
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig::defaults();
  return RunConfig::from_file(path);
}

void persist_config(const RunConfig& cfg, const fs::path& out_dir) {
  std::ofstream f(out_dir / "config.used", std::ios::trunc);
  if (!f) throw IoError("cannot write config.used");
  cfg.write(f);
}

// ---- subcommands -----------------------------------------------------------

int cmd_pretrain(const std::string& config_path, std::uint64_t seed,
                 const std::string& out) {
  const RunConfig cfg = load_config(config_path);
  fs::create_directories(out);

  DataSplits base = make_splits(cfg.scene, seed, "base", cfg.base_scenes,
                                ClassMix::base_only);
  ArcModel model = make_model(cfg.backbone, kNumBaseClasses,
                              base_class_names(), substream(seed, "init").next_u64());

  OptimConfig optim = cfg.optim;
  TrainLog log = adapt(model, Mode::pretrained, base.train, {}, optim, seed);

  const Checkpoint ckpt = model.to_checkpoint();
  save_checkpoint(ckpt, fs::path(out) / "model.arck");
  {
    std::ofstream f(fs::path(out) / "train_log.csv", std::ios::trunc);
    write_train_log_csv(f, log);
  }

  const DatasetEval ev_base = evaluate_model(model, base.val, base_class_ids(),
                                             eval_options(cfg, true));
  write_eval_files(out, "eval_base", ev_base);

  // Task-split evaluation of the base model: no specialist head exists, so
  // task mAP is 0 by construction; the row anchors the comparison table.
  DataSplits task = make_splits(cfg.scene, seed, "task", cfg.task_scenes,
                                ClassMix::task_only);
  const DatasetEval ev_task = evaluate_model(model, task.val, task_class_ids(),
                                             eval_options(cfg, true));
  write_eval_files(out, "eval_task", ev_task);

  persist_config(cfg, out);
  write_manifest(out, "pretrained", seed, config_path,
                 {"model.arck", "train_log.csv", "eval_base.csv",
                  "eval_base_report.txt", "eval_task.csv",
                  "eval_task_report.txt", "config.used"});

  std::printf("pretrain: base mAP@0.5 = %.4f (floor %.2f)\n",
              ev_base.report.map50, cfg.pretrain_map50_floor);
  if (ev_base.report.map50 < cfg.pretrain_map50_floor) {
    std::fprintf(stderr,
                 "pretrain failed: mAP@0.5 %.4f below floor %.2f\n",
                 ev_base.report.map50, cfg.pretrain_map50_floor);
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_adapt(const std::string& mode_str, const std::string& base_ckpt,
              const std::string& config_path, std::uint64_t seed,
              const std::string& out) {
  const Mode mode = parse_mode(mode_str);
  if (mode == Mode::pretrained) {
    throw ConfigError("adapt modes are finetune | joint | arc");
  }
  const RunConfig cfg = load_config(config_path);
  fs::create_directories(out);

  const Checkpoint pretrained = load_checkpoint(base_ckpt);

  HeadConfig task_head;
  task_head.num_classes = 1;
  task_head.class_id_offset = kNumBaseClasses;
  task_head.class_names = {task_class_name()};
  BridgeConfig bridge_cfg;
  bridge_cfg.reduction_ratio = 8;
  bridge_cfg.alpha_init = 0.0;

  ArcModel model = build_arc(pretrained, cfg.backbone, kNumBaseClasses,
                             base_class_names(), {task_head}, bridge_cfg,
                             substream(seed, "init").next_u64());
  model.apply_mode(mode);
  const Checkpoint before = model.to_checkpoint();

  DataSplits base = make_splits(cfg.scene, seed, "base", cfg.base_scenes,
                                ClassMix::base_only);
  DataSplits task = make_splits(cfg.scene, seed, "task", cfg.task_scenes,
                                ClassMix::task_only);

  TrainLog log = adapt(model, mode, base.train, task.train, cfg.optim, seed);

  const Checkpoint after = model.to_checkpoint();
  save_checkpoint(after, fs::path(out) / "model.arck");
  {
    std::ofstream f(fs::path(out) / "train_log.csv", std::ios::trunc);
    write_train_log_csv(f, log);
  }

  // Frozen audit: in arc mode the frozen set must be byte-identical; in the
  // other modes the base entries are trainable and expected to move.
  bool base_identical;
  if (mode == Mode::arc) {
    base_identical = verify_frozen(model, before, after);
    if (!base_identical) {
      std::fprintf(stderr, "arc adaptation mutated frozen parameters\n");
      return kExitNumeric;
    }
  } else {
    Checkpoint before_base, after_base;
    for (const auto& e : before.entries) {
      if (e.name.rfind("backbone.", 0) == 0 ||
          e.name.rfind("context_head.", 0) == 0) {
        CheckpointEntry marked = e;
        marked.frozen = true;  // compare this subset bytewise
        before_base.entries.push_back(marked);
      }
    }
    for (const auto& e : after.entries) {
      if (e.name.rfind("backbone.", 0) == 0 ||
          e.name.rfind("context_head.", 0) == 0) {
        CheckpointEntry marked = e;
        marked.frozen = true;
        after_base.entries.push_back(marked);
      }
    }
    base_identical = frozen_entries_identical(before_base, after_base);
  }
  {
    std::ofstream f(fs::path(out) / "frozen_check.txt", std::ios::trunc);
    f << "mode=" << mode_name(mode) << "\n";
    f << "base_entries_identical=" << (base_identical ? "true" : "false")
      << "\n";
  }

  persist_config(cfg, out);
  write_manifest(out, std::string(mode_name(mode)), seed, config_path,
                 {"model.arck", "train_log.csv", "frozen_check.txt",
                  "config.used"});
  std::printf("adapt(%s): done; base entries %s\n", mode_str.c_str(),
              base_identical ? "unchanged" : "changed (expected)");
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& split,
             const std::string& veto, const std::string& config_path,
             std::uint64_t seed, const std::string& out) {
  if (veto != "on" && veto != "off") {
    throw ConfigError("--veto must be on or off");
  }
  if (split != "base" && split != "task" && split != "mixed") {
    throw ConfigError("--split must be base | task | mixed");
  }
  const RunConfig cfg = load_config(config_path);
  fs::create_directories(out);

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  ArcModel model = model_from_checkpoint(ckpt, cfg.backbone,
                                         base_class_names(),
                                         {task_class_name()});

  std::vector<Scene> scenes;
  std::vector<int> class_set;
  if (split == "base") {
    scenes = make_splits(cfg.scene, seed, "base", cfg.base_scenes,
                         ClassMix::base_only)
                 .val;
    class_set = base_class_ids();
  } else if (split == "task") {
    scenes = make_splits(cfg.scene, seed, "task", cfg.task_scenes,
                         ClassMix::task_only)
                 .val;
    class_set = task_class_ids();
  } else {
    scenes = generate(cfg.scene, substream(seed, "data.mixed").next_u64(),
                      cfg.mixed_scenes, ClassMix::mixed);
    class_set = all_class_ids();
  }

  const DatasetEval ev =
      evaluate_model(model, scenes, class_set, eval_options(cfg, veto == "on"));
  const std::string stem = "eval_" + split;
  write_eval_files(out, stem, ev);
  persist_config(cfg, out);
  write_manifest(out, "eval", seed, config_path,
                 {stem + ".csv", stem + "_report.txt",
                  stem + "_detections.tsv", stem + "_gt.tsv", "config.used"},
                 "manifest." + stem + "_veto_" + veto + ".txt");
  std::printf("eval %s (veto %s): mAP@0.5 = %.4f, mAP@0.5:0.95 = %.4f\n",
              split.c_str(), veto.c_str(), ev.report.map50,
              ev.report.map5095);
  return kExitOk;
}

struct RunRow {
  std::string dir;
  std::string mode;
  double task_map50 = 0.0;
  double base_map50 = 0.0;
};

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  std::vector<RunRow> rows;
  std::optional<double> pretrained_base;
  for (const std::string& dir : runs) {
    RunRow row;
    row.dir = dir;
    const auto manifest = read_manifest(dir);
    const auto it = manifest.find("mode");
    row.mode = it == manifest.end() ? "?" : it->second;
    const fs::path base_csv = fs::path(dir) / "eval_base.csv";
    const fs::path task_csv = fs::path(dir) / "eval_task.csv";
    if (!fs::exists(base_csv) || !fs::exists(task_csv)) {
      throw IoError("run dir " + dir +
                    " is missing eval_base.csv or eval_task.csv");
    }
    std::ifstream bf(base_csv), tf(task_csv);
    row.base_map50 = read_report_summary(bf).at("map50");
    row.task_map50 = read_report_summary(tf).at("map50");
    if (row.mode == "pretrained") pretrained_base = row.base_map50;
    rows.push_back(row);
  }

  std::ostringstream table;
  table << "mode        task_mAP50  base_mAP50  forgetting_pts  forgetting_rel%\n";
  char line[160];
  for (const RunRow& r : rows) {
    if (pretrained_base.has_value() && r.mode != "pretrained") {
      std::snprintf(line, sizeof(line), "%-11s %10.4f  %10.4f  %14.2f  %15.2f\n",
                    r.mode.c_str(), r.task_map50, r.base_map50,
                    forgetting_points(*pretrained_base, r.base_map50),
                    forgetting_relative_percent(*pretrained_base,
                                                r.base_map50));
    } else {
      std::snprintf(line, sizeof(line), "%-11s %10.4f  %10.4f  %14s  %15s\n",
                    r.mode.c_str(), r.task_map50, r.base_map50, "n/a", "n/a");
    }
    table << line;
  }
  std::fputs(table.str().c_str(), stdout);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream f(fs::path(out) / "comparison.txt", std::ios::trunc);
    if (!f) throw IoError("cannot write comparison.txt");
    f << table.str();
  }
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, int cases) {
  if (cases < 1) {
    std::fprintf(stderr, "gradcheck: --cases must be >= 1\n");
    return kExitValidation;
  }
  const auto results = run_gradcheck_suite(seed, cases);
  bool all_pass = true;
  for (const OpGradCheck& r : results) {
    std::printf("%-18s max_rel_err=%.3e  %s\n", r.op.c_str(), r.max_rel_err,
                r.pass ? "PASS" : "FAIL");
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kExitOk : kExitNumeric;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"ARC continual-learning detection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--seed", seed, "root seed for data/init/shuffle streams");
    auto* o = sub->add_option("--out", out, "output directory")
                  ->envname("ARC_OUT_DIR");
    if (out_required) o->required();
  };

  auto* pre = app.add_subcommand("pretrain", "train the base detector");
  add_common(pre, true);

  auto* adp = app.add_subcommand("adapt", "adapt a pretrained checkpoint");
  std::string mode, base_ckpt;
  adp->add_option("--mode", mode, "finetune | joint | arc")->required();
  adp->add_option("--base-ckpt", base_ckpt, "pretrained checkpoint")
      ->required();
  add_common(adp, true);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt, split, veto = "on";
  ev->add_option("--ckpt", ckpt, "checkpoint to evaluate")->required();
  ev->add_option("--split", split, "base | task | mixed")->required();
  ev->add_option("--veto", veto, "veto fusion: on | off");
  add_common(ev, true);

  auto* rep = app.add_subcommand("report", "compose run reports");
  std::vector<std::string> runs;
  std::string report_out;
  rep->add_option("--runs", runs, "run directories")->required()
      ->expected(-1);
  rep->add_option("--out", report_out, "optional output directory");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference suite");
  int cases = 20;
  std::uint64_t gc_seed = 1;
  gc->add_option("--seed", gc_seed, "root seed");
  gc->add_option("--cases", cases, "random cases per op");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (pre->parsed()) return cmd_pretrain(config_path, seed, out);
  if (adp->parsed()) return cmd_adapt(mode, base_ckpt, config_path, seed, out);
  if (ev->parsed()) return cmd_eval(ckpt, split, veto, config_path, seed, out);
  if (rep->parsed()) return cmd_report(runs, report_out);
  if (gc->parsed()) return cmd_gradcheck(gc_seed, cases);
  return kExitValidation;
}

}  // namespace
}  // namespace arc

int main(int argc, char** argv) {
  try {
    return arc::dispatch(argc, argv);
  } catch (const arc::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return arc::kExitNumeric;
  } catch (const arc::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return arc::kExitIo;
  } catch (const arc::CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return arc::kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return arc::kExitValidation;
  }
}
