// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/cli/commands.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "amd/cli/experiment.hpp"
#include "amd/errors.hpp"
#include "amd/harness/training.hpp"
#include "amd/metrics/metrics.hpp"
#include "amd/recognizer/checkpoint.hpp"

namespace amd::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string pct(double v) { return fixed(v) + "%"; }

// Timestamps and host details live here only, so every other output file
// is byte-reproducible.
class SidecarLog {
 public:
  SidecarLog(const fs::path& path, const std::string& command) : out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot write log " + path.string());
    char host[256] = {};
    gethostname(host, sizeof(host) - 1);
    line("command " + command + " on host " + host);
  }
  ~SidecarLog() { line("done"); }

  void line(const std::string& msg) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
    out_ << stamp << ' ' << msg << '\n' << std::flush;
  }

  harness::EpochCallback epochs(const std::string& stage) {
    return [this, stage](const harness::EpochRecord& e) {
      line(stage + " epoch " + std::to_string(e.epoch) + " val_cer " + fixed(e.val_cer) + " wall_seconds " +
           fixed(e.wall_seconds));
    };
  }

 private:
  std::ofstream out_;
};

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("AMD_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("AMD_SEED: not an unsigned integer: ") + v);
  return s;
}

fs::path prepare_out(const ExperimentSpec& spec, const std::string& override_dir) {
  const fs::path out = override_dir.empty() ? spec.output : fs::path(override_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path source_dir(const fs::path& root, std::size_t i, std::size_t n) {
  return root / (n == 1 ? std::string("source") : "source_" + std::to_string(i));
}

const DataSpec& require_target(const ExperimentSpec& spec) {
  if (!spec.target) throw ConfigError("target: missing");
  return *spec.target;
}

model::Checkpoint load_source(const std::string& path) {
  auto ck = model::load_checkpoint(path);
  for (const auto& bn : ck.model.bn_layers()) {
    if (!bn.populated) throw ContractError("checkpoint " + path + " lacks BN running statistics");
  }
  return ck;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const auto spec = load_experiment(spec_path, seed_from_env());
  if (spec.sources.empty() && !spec.target) throw ConfigError("spec: needs a source or a target dataset");
  auto report = [&](const std::string& name, const DataSpec& d, const fs::path& dir) {
    if (d.manifest) {
      out << name << ": uses existing manifest " << d.manifest->string() << '\n';
      return;
    }
    const auto manifest = materialize(d, dir);
    const auto m = synth::read_manifest(manifest);
    out << name << ": " << m.rows.size() << " samples (" << m.count("train") << " train / " << m.count("val")
        << " val / " << m.count("test") << " test) -> " << manifest.string() << '\n';
  };
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    report(spec.sources.size() == 1 ? "source" : "source_" + std::to_string(i), spec.sources[i],
           source_dir(out_dir, i, spec.sources.size()));
  }
  if (spec.target) report("target", *spec.target, fs::path(out_dir) / "target");
  return kOk;
}

int cmd_pretrain(const std::string& spec_path, const std::string& out_override, std::ostream& out) {
  const auto spec = load_experiment(spec_path, seed_from_env());
  if (spec.sources.empty()) throw ConfigError("source: missing");
  const fs::path dir = prepare_out(spec, out_override);
  SidecarLog log(dir / "pretrain.log", "pretrain " + spec_path);

  std::vector<synth::Manifest> manifests;
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    manifests.push_back(synth::read_manifest(materialize(spec.sources[i], source_dir(dir / "data", i, spec.sources.size()))));
    if (!(manifests[i].alphabet == manifests[0].alphabet)) {
      throw ConfigError("source[" + std::to_string(i) + "]: alphabet differs from source[0]");
    }
  }
  const auto cfg = model_config(spec, manifests[0].alphabet);
  std::vector<std::vector<synth::Sample>> train;
  std::vector<synth::Sample> val, test;
  for (const auto& m : manifests) {
    train.push_back(synth::load_samples(m, "train", cfg.height));
    auto v = synth::load_samples(m, "val", cfg.height);
    auto t = synth::load_samples(m, "test", cfg.height);
    val.insert(val.end(), v.begin(), v.end());
    test.insert(test.end(), t.begin(), t.end());
  }
  const auto run = harness::pretrain(cfg, train, val, spec.train, test.empty() ? nullptr : &test, log.epochs("pretrain"));
  model::CheckpointMetadata meta;
  meta.epoch = run.record.best_epoch;
  meta.val_cer = run.record.best_val_cer();
  meta.seed = spec.seed;
  meta.extra = {{"stage", "pretrain"}};
  model::save_checkpoint(dir / "source.ckpt", run.model, meta);
  run.record.write(dir / "pretrain_record.json");
  out << "pretrain: best epoch " << run.record.best_epoch << ", val CER " << pct(meta.val_cer);
  if (run.record.test_cer) out << ", test CER " << pct(*run.record.test_cer) << ", test WER " << pct(*run.record.test_wer);
  out << " -> " << (dir / "source.ckpt").string() << '\n';
  return kOk;
}

int cmd_adapt(const std::string& spec_path, const std::string& checkpoint, const std::string& out_override,
              std::ostream& out) {
  const auto spec = load_experiment(spec_path, seed_from_env());
  const auto& target = require_target(spec);
  auto ck = load_source(checkpoint);
  const fs::path dir = prepare_out(spec, out_override);
  SidecarLog log(dir / "adapt.log", "adapt " + spec_path + " " + checkpoint);
  const auto data = load_target(materialize(target, dir / "data" / "target"), ck.model.config().height);
  const double baseline = harness::evaluate(ck.model, data.test, spec.adapt.batch_size).cer;
  const auto run = harness::adapt(ck.model, data.train_images, data.val, spec.adapt, &data.test, log.epochs("adapt"));

  model::CheckpointMetadata meta;
  meta.epoch = run.record.best_epoch;
  meta.val_cer = run.record.best_val_cer();
  meta.seed = spec.seed;
  meta.extra = {{"stage", "adapt"}, {"source_checkpoint_epoch", ck.metadata.epoch}};
  model::save_checkpoint(dir / "adapted.ckpt", run.model, meta);
  auto record = run.record.to_json();
  record["baseline_test_cer"] = baseline;
  write_text(dir / "adapt_record.json", record.dump(2) + "\n");

  const std::string dest = (dir / "adapted.ckpt").string();
  if (run.record.noop) {
    out << "adapt: no-op adaptation (all AMD weights are zero), test CER " << pct(*run.record.test_cer) << " -> "
        << dest << '\n';
  } else {
    out << "adapt: best epoch " << run.record.best_epoch << ", val CER " << pct(run.record.epochs.front().val_cer)
        << " -> " << pct(meta.val_cer) << ", test CER " << pct(baseline) << " -> " << pct(*run.record.test_cer)
        << " -> " << dest << '\n';
  }
  return kOk;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& manifest, const std::string& split,
                 std::size_t batch_size, const std::string& report_prefix, std::ostream& out) {
  auto ck = model::load_checkpoint(checkpoint);
  const std::string filter = split == "all" ? "" : split;
  const auto m = synth::read_manifest(manifest, filter);
  const auto samples = synth::load_samples(m, filter, ck.model.config().height);
  if (samples.empty()) throw ConfigError("evaluate: split '" + split + "' of " + manifest + " is empty");
  const auto report = harness::evaluate(ck.model, samples, batch_size);
  if (!report_prefix.empty()) report.write(report_prefix + ".json", report_prefix + ".tsv");
  out << "evaluate: CER " << pct(report.cer) << ", WER " << pct(report.wer) << " over " << report.count()
      << " samples\n";
  return kOk;
}

int cmd_search(const std::string& spec_path, const std::string& checkpoint, const std::string& out_override,
               std::size_t jobs, std::ostream& out) {
  auto spec = load_experiment(spec_path, seed_from_env());
  if (jobs > 0) spec.search.jobs = jobs;
  auto ck = load_source(checkpoint);
  const fs::path dir = prepare_out(spec, out_override);
  SidecarLog log(dir / "search.log", "search " + spec_path + " " + checkpoint);
  const auto data = load_target(materialize(require_target(spec), dir / "data" / "target"), ck.model.config().height);
  const double baseline = harness::evaluate(ck.model, data.test, spec.adapt.batch_size).cer;
  const auto trials = harness::random_search(ck.model, data, spec.adapt, spec.search);

  std::ostringstream tsv;
  tsv << "rank\ttrial\talign\tminimize\tdiversify\tlr\tbn_layers\tval_cer\ttest_cer\tbest_epoch\n";
  nlohmann::json j = {{"baseline_test_cer", baseline}, {"search", harness::to_json(spec.search)}};
  j["search"].erase("jobs");
  j["trials"] = nlohmann::json::array();
  for (std::size_t r = 0; r < trials.size(); ++r) {
    const auto& t = trials[r];
    char lr[32];
    std::snprintf(lr, sizeof(lr), "%.6g", t.config.lr);
    tsv << r + 1 << '\t' << t.index << '\t' << t.config.weights.align << '\t' << t.config.weights.minimize << '\t'
        << t.config.weights.diversify << '\t' << lr << '\t' << harness::layers_label(t.config.bn_layers) << '\t'
        << fixed(t.val_cer) << '\t' << fixed(t.test_cer) << '\t' << t.best_epoch << '\n';
    j["trials"].push_back({{"rank", r + 1},
                           {"trial", t.index},
                           {"config", harness::to_json(t.config)},
                           {"val_cer", t.val_cer},
                           {"test_cer", t.test_cer},
                           {"best_epoch", t.best_epoch}});
    log.line("trial " + std::to_string(t.index) + " val_cer " + fixed(t.val_cer) + " wall_seconds " +
             fixed(t.wall_seconds));
  }
  write_text(dir / "search.tsv", tsv.str());
  write_text(dir / "search.json", j.dump(2) + "\n");
  const auto& best = trials.front();
  out << "search: " << trials.size() << " trials, best trial " << best.index << " val CER " << pct(best.val_cer)
      << ", test CER " << pct(baseline) << " -> " << pct(best.test_cer) << " ("
      << fixed(harness::relative_decrease(baseline, best.test_cer)) << "% decrease) -> " << (dir / "search.tsv").string()
      << '\n';
  return kOk;
}

int cmd_ablate(const std::string& kind, const std::string& spec_path, const std::string& checkpoint,
               const std::string& out_override, std::size_t jobs, std::ostream& out) {
  auto spec = load_experiment(spec_path, seed_from_env());
  if (jobs > 0) spec.search.jobs = jobs;
  const auto& target = require_target(spec);
  if (target.manifest) throw ConfigError("target: ablations need a generated target to apply scenario shifts");
  auto ck = load_source(checkpoint);
  const fs::path dir = prepare_out(spec, out_override);
  SidecarLog log(dir / ("ablate_" + kind + ".log"), "ablate " + kind + " " + spec_path + " " + checkpoint);

  const auto scenarios_spec = spec.scenarios.empty() ? harness::builtin_scenarios() : spec.scenarios;
  std::vector<harness::ScenarioData> scenarios;
  for (const auto& sc : scenarios_spec) {
    DataSpec d = target;
    d.generate.shift = sc.shift;
    auto data = load_target(materialize(d, dir / "data" / sc.name), ck.model.config().height);
    scenarios.push_back(harness::make_scenario(ck.model, sc.name, std::move(data), spec.adapt.batch_size));
    log.line("scenario " + sc.name + " baseline_test_cer " + fixed(scenarios.back().baseline_test_cer));
  }
  std::string tsv;
  std::size_t rows = 0;
  if (kind == "loss") {
    const auto r = harness::ablate_loss_terms(ck.model, scenarios, spec.adapt, spec.search);
    tsv = harness::to_tsv(r, scenarios);
    rows = r.size();
  } else {
    const auto r = harness::ablate_bn_layers(ck.model, scenarios, spec.adapt, spec.search.jobs, spec.search.bn_subsets);
    tsv = harness::to_tsv(r, scenarios);
    rows = r.size();
  }
  const fs::path path = dir / ("ablation_" + kind + ".tsv");
  write_text(path, tsv);
  out << "ablate " << kind << ": " << rows << " rows over " << scenarios.size() << " scenarios -> " << path.string()
      << '\n';
  return kOk;
}

int cmd_overlap(const std::string& source, const std::string& target, std::ostream& out) {
  const auto s = synth::read_image_list(source);
  const auto t = synth::read_image_list(target);
  out << "overlap: " << metrics::alphabet_overlap(s.alphabet, t.alphabet) << "% of the target alphabet ("
      << t.alphabet.size() << " characters) is covered by the source alphabet (" << s.alphabet.size()
      << " characters)\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Source-free domain adaptation toolkit for CTC text recognizers"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string spec, out_dir, checkpoint, manifest, split = "test", report, kind, source, target;
  std::size_t jobs = 0, batch_size = 16;

  auto* gen = app.add_subcommand("gen-data", "Generate the source/target datasets of a spec");
  gen->add_option("--spec", spec, "Experiment spec (JSON)")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* pre = app.add_subcommand("pretrain", "Supervised CTC pre-training on the source data");
  pre->add_option("--spec", spec, "Experiment spec (JSON)")->required();
  pre->add_option("--out", out_dir, "Output directory (default: the spec's \"output\")");

  auto* ad = app.add_subcommand("adapt", "Source-free AMD adaptation to the target data");
  ad->add_option("--spec", spec, "Experiment spec (JSON)")->required();
  ad->add_option("--checkpoint", checkpoint, "Source checkpoint")->required();
  ad->add_option("--out", out_dir, "Output directory (default: the spec's \"output\")");

  auto* ev = app.add_subcommand("evaluate", "Greedy-decode a manifest split and report CER/WER");
  ev->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  ev->add_option("--manifest", manifest, "Dataset manifest (TSV)")->required();
  ev->add_option("--split", split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test", "all"}))->capture_default_str();
  ev->add_option("--batch-size", batch_size, "Evaluation batch size")->check(CLI::PositiveNumber)->capture_default_str();
  ev->add_option("--report", report, "Write <prefix>.json and <prefix>.tsv per-sample reports");

  auto* se = app.add_subcommand("search", "Random search over AMD weights, learning rate and BN layers");
  se->add_option("--spec", spec, "Experiment spec (JSON)")->required();
  se->add_option("--checkpoint", checkpoint, "Source checkpoint")->required();
  se->add_option("--out", out_dir, "Output directory (default: the spec's \"output\")");
  se->add_option("--jobs", jobs, "Parallel trials (default: the spec's search.jobs)");

  auto* ab = app.add_subcommand("ablate", "Loss-term or BN-layer ablation over the shift scenarios");
  ab->add_option("--kind", kind, "Ablation kind")->required()->check(CLI::IsMember({"loss", "bn"}));
  ab->add_option("--spec", spec, "Experiment spec (JSON)")->required();
  ab->add_option("--checkpoint", checkpoint, "Source checkpoint")->required();
  ab->add_option("--out", out_dir, "Output directory (default: the spec's \"output\")");
  ab->add_option("--jobs", jobs, "Parallel runs (default: the spec's search.jobs)");

  auto* ov = app.add_subcommand("overlap", "Share of the target alphabet covered by the source alphabet");
  ov->add_option("--source", source, "Source manifest")->required();
  ov->add_option("--target", target, "Target manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return cmd_gen_data(spec, out_dir, out);
    if (*pre) return cmd_pretrain(spec, out_dir, out);
    if (*ad) return cmd_adapt(spec, checkpoint, out_dir, out);
    if (*ev) return cmd_evaluate(checkpoint, manifest, split, batch_size, report, out);
    if (*se) return cmd_search(spec, checkpoint, out_dir, jobs, out);
    if (*ab) return cmd_ablate(kind, spec, checkpoint, out_dir, jobs, out);
    if (*ov) return cmd_overlap(source, target, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const ContractError& e) {
    err << "contract violation: " << e.what() << '\n';
    return kContractViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace amd::cli
