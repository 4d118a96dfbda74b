// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Criteria 7-10 and the noise monotonicity property: desk-scale experiments
// driven through the command-line entry point.

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "acceptance.hpp"
#include "amd/cli/commands.hpp"
#include "amd/harness/experiments.hpp"
#include "amd/harness/training.hpp"
#include "amd/recognizer/checkpoint.hpp"
#include "amd/rng.hpp"
#include "amd/synth/dataset.hpp"
#include "amd/synth/shift.hpp"
#include "json.hpp"

namespace amd::acceptance {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
constexpr double kMinDecrease = 15.0;
constexpr double kTimeBudgetSeconds = 45 * 60;
constexpr std::size_t kBudgetCores = 4;

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void amd_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "amd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != cli::kOk) {
    throw std::runtime_error("amd " + args[1] + " exited " + std::to_string(code) + ": " + err.str());
  }
}

double median_of(std::vector<double> v) { return harness::median(std::move(v)); }

json data_spec(std::size_t count) {
  return {{"lexicon", {{"size", 2000}, {"min_length", 3}, {"max_length", 6}}},
          {"alphabet", "abcdefghij"},
          {"count", count},
          {"height", 32},
          {"augmentation", {{"preset", "pretrain"}}}};
}

// The desk experiment: a 2000-sample source over a 10-character alphabet and
// a 600-sample target drawn from the same lexicon.
json desk_spec(std::uint64_t seed, const fs::path& output, const synth::DomainShiftConfig& shift) {
  json target = data_spec(600);
  target["splits"] = {0.6, 0.2, 0.2};
  target["shift"] = synth::to_json(shift);
  return {{"seed", seed},
          {"output", output.string()},
          {"model",
           {{"height", 32},
            {"blocks", {{{"channels", 8}, {"pool", true}}, {{"channels", 16}, {"pool", true}}, {{"channels", 16}}}},
            {"hidden", 32}}},
          {"source", data_spec(2000)},
          {"target", target},
          {"train", {{"lr", 1e-3}, {"batch_size", 16}, {"patience", 5}, {"max_epochs", 40}}},
          {"adapt",
           {{"weights", {{"align", 1}, {"minimize", 1}, {"diversify", 1}}},
            {"bn_layers", {2}},
            {"lr", 1e-4},
            {"batch_size", 16},
            {"patience", 8},
            {"max_epochs", 40}}},
          {"search", {{"trials", 20}, {"jobs", 1}}}};
}

struct SourceRun {
  fs::path dir;
  fs::path checkpoint;
  double val_cer = 0.0;
  double test_cer = 0.0;
};

class Desk {
 public:
  explicit Desk(fs::path root) : root_(std::move(root)) {}

  fs::path seed_dir(std::uint64_t seed) const { return root_ / ("seed_" + std::to_string(seed)); }

  // Writes a spec for `seed` with the given target shift and returns its path.
  fs::path spec(std::uint64_t seed, const std::string& name, const synth::DomainShiftConfig& shift,
                const std::function<void(json&)>& edit = {}) const {
    json j = desk_spec(seed, seed_dir(seed), shift);
    if (edit) edit(j);
    const fs::path p = seed_dir(seed) / "specs" / (name + ".json");
    write_file(p, j.dump(2));
    return p;
  }

  // Pretrains once per seed; a finished run with identical pretraining inputs
  // is reused.
  const SourceRun& source(std::uint64_t seed) {
    auto it = runs_.find(seed);
    if (it != runs_.end()) return it->second;
    const fs::path dir = seed_dir(seed);
    json pretrain_inputs = desk_spec(seed, dir, {});
    for (const char* k : {"target", "adapt", "search"}) pretrain_inputs.erase(k);
    const std::string spec_text = pretrain_inputs.dump(2);
    const fs::path stamp = dir / "pretrained_spec.json";
    if (!(fs::exists(dir / "source.ckpt") && fs::exists(stamp) && slurp(stamp) == spec_text)) {
      amd_cli({"pretrain", "--spec", spec(seed, "source", {}).string()});
      write_file(stamp, spec_text);
    }
    const auto record = read_json(dir / "pretrain_record.json");
    SourceRun run;
    run.dir = dir;
    run.checkpoint = dir / "source.ckpt";
    run.test_cer = record.at("test_cer").get<double>();
    for (const auto& e : record.at("epochs")) {
      if (e.at("epoch").get<std::size_t>() == record.at("best_epoch").get<std::size_t>()) {
        run.val_cer = e.at("val_cer").get<double>();
      }
    }
    return runs_.emplace(seed, run).first->second;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::map<std::uint64_t, SourceRun> runs_;
};

// ---- criterion 7 ----------------------------------------------------------

// Per-trial wall times from a search sidecar log, in trial order.
std::vector<double> trial_seconds(const fs::path& log) {
  std::map<std::size_t, double> by_index;
  std::istringstream in(slurp(log));
  for (std::string line; std::getline(in, line);) {
    std::istringstream words(line);
    std::string stamp, tag, val_tag, wall_tag;
    std::size_t index = 0;
    double val = 0.0, wall = 0.0;
    if (words >> stamp >> tag >> index >> val_tag >> val >> wall_tag >> wall && tag == "trial" &&
        wall_tag == "wall_seconds") {
      by_index[index] = wall;
    }
  }
  std::vector<double> out;
  for (const auto& [i, w] : by_index) out.push_back(w);
  return out;
}

// Makespan of trials handed out in order to the first free worker.
double makespan(const std::vector<double>& seconds, std::size_t workers) {
  std::vector<double> busy(workers, 0.0);
  for (double s : seconds) *std::min_element(busy.begin(), busy.end()) += s;
  return *std::max_element(busy.begin(), busy.end());
}

Outcome end_to_end(Desk& desk) {
  const Stopwatch clock;
  const auto scenarios = harness::builtin_scenarios();
  bool pass = true;
  std::ostringstream detail;
  std::vector<double> source_val;
  std::map<std::string, std::vector<double>> decreases;
  std::map<std::string, double> worst_ratio;
  double serial_trials = 0.0, parallel_trials = 0.0;
  for (auto seed : kSeeds) {
    const auto& src = desk.source(seed);
    source_val.push_back(src.val_cer);
    if (!(src.val_cer < 10.0)) pass = false;
    for (const auto& sc : scenarios) {
      const fs::path out = src.dir / ("search_" + sc.name);
      amd_cli({"search", "--spec", desk.spec(seed, "search_" + sc.name, sc.shift).string(), "--checkpoint",
               src.checkpoint.string(), "--out", out.string()});
      const auto result = read_json(out / "search.json");
      const auto seconds = trial_seconds(out / "search.log");
      if (seconds.size() != result.at("trials").size()) pass = false;
      for (double t : seconds) serial_trials += t;
      parallel_trials += makespan(seconds, kBudgetCores);
      const double baseline = result.at("baseline_test_cer").get<double>();
      const double adapted = result.at("trials").at(0).at("test_cer").get<double>();
      decreases[sc.name].push_back(harness::relative_decrease(baseline, adapted));
      const double ratio = src.test_cer > 0.0 ? baseline / src.test_cer : 1e300;
      if (!worst_ratio.contains(sc.name) || ratio < worst_ratio[sc.name]) worst_ratio[sc.name] = ratio;
      if (!(baseline >= 1.5 * src.test_cer)) pass = false;
    }
  }
  detail << "source val CER per seed";
  for (double v : source_val) detail << ' ' << fixed(v) << '%';
  detail << " (< 10%); median decrease per shift:";
  for (const auto& sc : scenarios) {
    const double med = median_of(decreases[sc.name]);
    if (!(med >= kMinDecrease)) pass = false;
    detail << ' ' << sc.name << ' ' << fixed(med) << "% [";
    for (std::size_t i = 0; i < decreases[sc.name].size(); ++i) {
      detail << (i ? " " : "") << fixed(decreases[sc.name][i], 1);
    }
    detail << "] baseline/source >= " << (worst_ratio[sc.name] > 1e299 ? std::string("inf") : fixed(worst_ratio[sc.name], 1))
           << 'x';
    detail << ';';
  }
  const double secs = clock.seconds();
  const double projected = secs - serial_trials + parallel_trials;
  if (!(projected < kTimeBudgetSeconds)) pass = false;
  detail << " need >= " << fixed(kMinDecrease, 0) << "% and >= 1.5x; " << fixed(secs / 60.0, 1)
         << " min on 1 core, projected " << fixed(projected / 60.0, 1) << " min with --jobs " << kBudgetCores
         << " (budget " << fixed(kTimeBudgetSeconds / 60.0, 0) << " min)";
  return {pass, detail.str()};
}

// ---- criterion 8 ----------------------------------------------------------

bool same_state(const model::Recognizer& a, const model::Recognizer& b) {
  const auto sa = a.state(), sb = b.state();
  if (sa.size() != sb.size()) return false;
  for (const auto& [k, v] : sa) {
    const auto it = sb.find(k);
    if (it == sb.end() || it->second.size() != v.size()) return false;
    if (std::memcmp(v.data(), it->second.data(), v.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome noop_and_stability(Desk& desk) {
  const auto& src1 = desk.source(kSeeds[0]);
  synth::DomainShiftConfig slant;
  slant.slant_deg = 30.0;
  const auto noop_spec = desk.spec(kSeeds[0], "noop", slant, [](json& j) {
    j["adapt"]["weights"] = {{"align", 0}, {"minimize", 0}, {"diversify", 0}};
  });
  const fs::path noop_out = src1.dir / "noop";
  amd_cli({"adapt", "--spec", noop_spec.string(), "--checkpoint", src1.checkpoint.string(), "--out", noop_out.string()});
  const bool identical = same_state(model::load_checkpoint(noop_out / "adapted.ckpt").model,
                                    model::load_checkpoint(src1.checkpoint).model);

  std::vector<double> selected, updated;
  for (auto seed : kSeeds) {
    const auto& src = desk.source(seed);
    const fs::path out = src.dir / "unshifted";
    amd_cli({"adapt", "--spec", desk.spec(seed, "unshifted", {}).string(), "--checkpoint", src.checkpoint.string(),
             "--out", out.string()});
    const auto record = read_json(out / "adapt_record.json");
    const auto& epochs = record.at("epochs");
    const double before = epochs.at(0).at("val_cer").get<double>();
    double best_after = 1e300, chosen = before;
    for (const auto& e : epochs) {
      const auto n = e.at("epoch").get<std::size_t>();
      if (n >= 1) best_after = std::min(best_after, e.at("val_cer").get<double>());
      if (n == record.at("best_epoch").get<std::size_t>()) chosen = e.at("val_cer").get<double>();
    }
    selected.push_back(chosen - before);
    updated.push_back(best_after - before);
  }
  const double med_selected = median_of(selected), med_updated = median_of(updated);
  return {identical && med_selected < 1.0 && med_updated < 1.0,
          std::string("zero weights: checkpoint state ") + (identical ? "bit-identical" : "CHANGED") +
              "; unshifted target val CER change, median of 3 seeds: selected model " + fixed(med_selected) +
              " points, best updated epoch " + fixed(med_updated) + " points (limit < 1)"};
}

// ---- criterion 9 ----------------------------------------------------------

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

Outcome contracts(Desk& desk) {
  const std::uint64_t seed = kSeeds[0];
  const auto& src = desk.source(seed);
  synth::DomainShiftConfig slant;
  slant.slant_deg = 30.0;
  auto adapt_edit = [](json& j) { j["adapt"]["bn_layers"] = {1, 2}; j["adapt"]["lr"] = 3e-4; };
  const auto spec = desk.spec(seed, "contracts", slant, adapt_edit);
  const fs::path root = src.dir / "contracts";
  fs::remove_all(root);
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  amd_cli({"adapt", "--spec", spec.string(), "--checkpoint", src.checkpoint.string(), "--out", (root / "ref").string()});
  const std::string ref = slurp(root / "ref" / "adapted.ckpt");

  // Label hygiene: train transcripts replaced by garbage.
  const fs::path target = root / "ref" / "data" / "target";
  std::istringstream lines(slurp(target / "manifest.tsv"));
  std::ostringstream garbled;
  std::size_t replaced = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.size() > 6 && line.compare(line.size() - 6, 6, "\ttrain") == 0) {
      line = line.substr(0, line.find('\t')) + "\t<garbage " + std::to_string(replaced++) + " XYZ>\ttrain";
    }
    garbled << line << '\n';
  }
  write_file(target / "garbled.tsv", garbled.str());
  const auto garbled_spec = desk.spec(seed, "contracts_garbled", slant, [&](json& j) {
    adapt_edit(j);
    j["target"] = {{"manifest", (target / "garbled.tsv").string()}};
  });
  amd_cli({"adapt", "--spec", garbled_spec.string(), "--checkpoint", src.checkpoint.string(), "--out",
           (root / "garbled").string()});
  expect(replaced > 0 && slurp(root / "garbled" / "adapted.ckpt") == ref, "label hygiene");

  // Source-freedom: the source dataset is moved away during adaptation.
  const fs::path source_data = src.dir / "data" / "source";
  const fs::path hidden = src.dir / "data" / "source.hidden";
  fs::rename(source_data, hidden);
  try {
    amd_cli({"adapt", "--spec", spec.string(), "--checkpoint", src.checkpoint.string(), "--out",
             (root / "no_source").string()});
  } catch (...) {
    fs::rename(hidden, source_data);
    throw;
  }
  fs::rename(hidden, source_data);
  expect(slurp(root / "no_source" / "adapted.ckpt") == ref, "source-freedom");

  // Frozen scope: everything outside the trainable partition is bit-identical.
  const auto before = model::load_checkpoint(src.checkpoint);
  const auto after = model::load_checkpoint(root / "ref" / "adapted.ckpt");
  auto scoped = before.model.clone();
  const auto partition = scoped.set_trainable_scope({1, 2});
  const std::set<std::string> trainable(partition.trainable.begin(), partition.trainable.end());
  const auto sb = before.model.state(), sa = after.model.state();
  std::size_t frozen_keys = 0, changed_trainable = 0;
  bool frozen_ok = sb.size() == sa.size();
  for (const auto& [k, v] : sb) {
    const auto& w = sa.at(k);
    const bool same = v.size() == w.size() && std::memcmp(v.data(), w.data(), v.size() * sizeof(double)) == 0;
    if (trainable.contains(k)) {
      changed_trainable += same ? 0 : 1;
    } else {
      ++frozen_keys;
      frozen_ok = frozen_ok && same;
    }
  }
  expect(frozen_ok, "frozen scope");

  // Checkpoint roundtrip.
  model::save_checkpoint(root / "roundtrip.ckpt", after.model, after.metadata);
  expect(slurp(root / "roundtrip.ckpt") == ref, "checkpoint roundtrip");

  // Dataset regeneration.
  amd_cli({"gen-data", "--spec", spec.string(), "--out", (root / "gen_a").string()});
  amd_cli({"gen-data", "--spec", spec.string(), "--out", (root / "gen_b").string()});
  const auto a = tree_bytes(root / "gen_a");
  expect(a.size() == 2 + 2000 + 600 && a == tree_bytes(root / "gen_b"), "dataset regeneration");

  std::ostringstream detail;
  detail << "label hygiene (" << replaced << " garbled transcripts), source-freedom, frozen scope (" << frozen_keys
         << " frozen tensors, " << changed_trainable << "/" << trainable.size()
         << " trainable changed), checkpoint roundtrip, regeneration (" << a.size() << " files)";
  if (!failures.empty()) {
    detail << "; FAILED:";
    for (const auto& f : failures) detail << ' ' << f;
  }
  return {failures.empty(), detail.str()};
}

// ---- criterion 10 ---------------------------------------------------------

std::vector<std::vector<std::string>> read_tsv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '\t');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome ablations(Desk& desk) {
  const std::uint64_t seed = kSeeds[0];
  const auto& src = desk.source(seed);
  const auto spec = desk.spec(seed, "ablation", {}, [](json& j) {
    j["search"]["trials"] = 3;
    j["adapt"]["max_epochs"] = 6;
    j["adapt"]["patience"] = 2;
  });
  const fs::path out = src.dir / "ablation";
  amd_cli({"ablate", "--kind", "loss", "--spec", spec.string(), "--checkpoint", src.checkpoint.string(), "--out",
           out.string()});
  amd_cli({"ablate", "--kind", "bn", "--spec", spec.string(), "--checkpoint", src.checkpoint.string(), "--out",
           out.string()});

  std::vector<std::string> problems;
  const auto loss = read_tsv(out / "ablation_loss.tsv");
  const std::vector<std::string> loss_head{"L_a", "L_m", "L_d", "median_decrease"};
  if (loss.size() != 8 || loss[0].size() != 8 || !std::equal(loss_head.begin(), loss_head.end(), loss[0].begin())) {
    problems.push_back("loss table shape");
  }
  double d_only = 0.0, worst_m = 1e300;
  std::ostringstream medians;
  for (std::size_t r = 1; r < loss.size(); ++r) {
    const auto& row = loss[r];
    const double med = std::stod(row.at(3));
    medians << ' ' << (row[0] == "1" ? "a" : "") << (row[1] == "1" ? "m" : "") << (row[2] == "1" ? "d" : "") << '='
            << fixed(med, 1);
    if (row[0] == "0" && row[1] == "0" && row[2] == "1") d_only = med;
    if (row[1] == "1") worst_m = std::min(worst_m, med);
  }
  if (!(worst_m >= d_only)) problems.push_back("an L_m row is below L_d-only");

  const auto bn = read_tsv(out / "ablation_bn.tsv");
  const std::vector<std::string> bn_head{"layers", "median_decrease", "max_decrease"};
  bool deepest = false;
  for (std::size_t r = 1; r < bn.size(); ++r) deepest = deepest || bn[r].at(0) == "2";
  if (bn.size() != 1 + 7 || bn[0].size() != 7 || !std::equal(bn_head.begin(), bn_head.end(), bn[0].begin()) || !deepest) {
    problems.push_back("bn table shape");
  }
  std::ostringstream detail;
  detail << "loss table " << (loss.size() - 1) << " rows x " << (loss.empty() ? 0 : loss[0].size() - 4)
         << " scenarios, medians" << medians.str() << "; min L_m row " << fixed(worst_m, 1) << " >= L_d-only "
         << fixed(d_only, 1) << "; bn table " << (bn.size() - 1) << " subsets";
  for (const auto& p : problems) detail << "; FAILED: " << p;
  return {problems.empty(), detail.str()};
}

// ---- noise monotonicity property ------------------------------------------

Outcome noise_monotonicity(Desk& desk) {
  std::size_t monotone = 0;
  std::ostringstream detail;
  for (auto seed : kSeeds) {
    const auto& src = desk.source(seed);
    auto ck = model::load_checkpoint(src.checkpoint);
    const auto m = synth::read_manifest(src.dir / "data" / "source" / "manifest.tsv", "test");
    const auto clean = synth::load_samples(m, "test", ck.model.config().height);
    std::vector<double> cers;
    for (double sigma : {0.0, 0.1, 0.2}) {
      synth::DomainShiftConfig shift;
      shift.noise_sigma = sigma;
      auto noisy = clean;
      for (std::size_t i = 0; i < noisy.size(); ++i) {
        noisy[i].image = synth::apply_domain_shift(clean[i].image, shift, derive_seed(seed, i, 0x5E));
      }
      cers.push_back(harness::evaluate(ck.model, noisy).cer);
    }
    const bool ok = cers[0] <= cers[1] && cers[1] <= cers[2];
    monotone += ok ? 1 : 0;
    detail << (seed == kSeeds[0] ? "" : "; ") << "seed " << seed << ": " << fixed(cers[0]) << " / " << fixed(cers[1])
           << " / " << fixed(cers[2]) << (ok ? "" : " (not monotone)");
  }
  return {monotone * 2 > std::size(kSeeds),
          "baseline CER at noise sigma 0/0.1/0.2, " + detail.str() + "; " + std::to_string(monotone) + "/3 monotone"};
}

}  // namespace

std::vector<Criterion> desk_criteria(const fs::path& work_dir) {
  auto desk = std::make_shared<Desk>(work_dir);
  return {{"7", "desk-scale end-to-end", [desk] { return end_to_end(*desk); }},
          {"8", "no-op and stability", [desk] { return noop_and_stability(*desk); }},
          {"9", "contract suite", [desk] { return contracts(*desk); }},
          {"10", "ablation harness", [desk] { return ablations(*desk); }},
          {"noise", "shift monotonicity property", [desk] { return noise_monotonicity(*desk); }}};
}

}  // namespace amd::acceptance
