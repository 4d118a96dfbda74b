// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amd/cli/commands.hpp"
#include "amd/recognizer/checkpoint.hpp"
#include "amd/synth/dataset.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "amd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = amd::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("amd_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json data_spec(std::size_t count) {
  return {{"lexicon", {{"size", 30}, {"min_length", 2}, {"max_length", 4}}},
          {"alphabet", "abc"},
          {"count", count},
          {"height", 16}};
}

json tiny_spec(const fs::path& dir) {
  json target = data_spec(40);
  target["shift"] = {{"invert", true}};
  return {{"seed", 3},
          {"output", (dir / "out").string()},
          {"model", {{"height", 16}, {"blocks", {{{"channels", 4}, {"pool", true}}, {{"channels", 6}, {"pool", true}}}}, {"hidden", 8}}},
          {"source", data_spec(60)},
          {"target", target},
          {"train", {{"lr", 0.003}, {"batch_size", 8}, {"patience", 2}, {"max_epochs", 4}}},
          {"adapt",
           {{"weights", {{"align", 1}, {"minimize", 1}, {"diversify", 1}}},
            {"bn_layers", {0, 1}},
            {"lr", 1e-3},
            {"batch_size", 8},
            {"patience", 1},
            {"max_epochs", 2}}},
          {"search", {{"trials", 2}, {"jobs", 1}}},
          {"scenarios", {{{"name", "inv"}, {"shift", {{"invert", true}}}}, {{"name", "slant"}, {"shift", {{"slant_deg", 30}}}}}}};
}

fs::path write_spec(const fs::path& dir, const json& j, const std::string& name = "spec.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

// Pretrains the tiny spec once per directory and returns the checkpoint.
fs::path pretrained(const fs::path& dir, const fs::path& spec) {
  const auto r = run({"pretrain", "--spec", spec.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return dir / "out" / "source.ckpt";
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("help lists every flag and exits 0") {
  const auto r = run({"--help-all"});
  CHECK(r.code == 0);
  for (const char* flag : {"gen-data", "pretrain", "adapt", "evaluate", "search", "ablate", "overlap", "--spec", "--out",
                           "--checkpoint", "--manifest", "--split", "--batch-size", "--report", "--jobs", "--kind",
                           "--source", "--target"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  CHECK(run({"evaluate", "--help"}).code == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == amd::cli::kConfigError);
  CHECK(run({"bogus"}).code == amd::cli::kConfigError);
  CHECK(run({"evaluate", "--checkpoint", "x"}).code == amd::cli::kConfigError);
  CHECK(run({"ablate", "--kind", "weights", "--spec", "s", "--checkpoint", "c"}).code == amd::cli::kConfigError);
}

TEST_CASE("gen-data writes the declared split sizes") {
  const auto dir = fresh_dir("gen");
  const auto spec = write_spec(dir, tiny_spec(dir));
  const auto r = run({"gen-data", "--spec", spec.string(), "--out", (dir / "d").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(line_count(r.out) == 2);
  const auto src = amd::synth::read_manifest(dir / "d" / "source" / "manifest.tsv");
  CHECK(src.count("train") == 48);
  CHECK(src.count("val") == 6);
  CHECK(src.count("test") == 6);
  const auto tgt = amd::synth::read_manifest(dir / "d" / "target" / "manifest.tsv");
  CHECK(tgt.rows.size() == 40);
}

TEST_CASE("gen-data is byte-identical for the same spec and seed") {
  const auto dir = fresh_dir("gen_repeat");
  const auto spec = write_spec(dir, tiny_spec(dir));
  REQUIRE(run({"gen-data", "--spec", spec.string(), "--out", (dir / "a").string()}).code == 0);
  REQUIRE(run({"gen-data", "--spec", spec.string(), "--out", (dir / "b").string()}).code == 0);
  const auto a = tree_bytes(dir / "a");
  CHECK(a.size() == 2 + 60 + 40);
  CHECK(a == tree_bytes(dir / "b"));
}

TEST_CASE("AMD_SEED overrides the spec seed") {
  const auto dir = fresh_dir("env_seed");
  auto j = tiny_spec(dir);
  j["seed"] = 5;
  const auto five = write_spec(dir, j, "five.json");
  const auto three = write_spec(dir, tiny_spec(dir), "three.json");
  REQUIRE(run({"gen-data", "--spec", five.string(), "--out", (dir / "five").string()}).code == 0);
  ::setenv("AMD_SEED", "5", 1);
  const auto r = run({"gen-data", "--spec", three.string(), "--out", (dir / "env").string()});
  ::setenv("AMD_SEED", "nope", 1);
  const auto bad = run({"gen-data", "--spec", three.string(), "--out", (dir / "bad").string()});
  ::unsetenv("AMD_SEED");
  REQUIRE(r.code == 0);
  CHECK(tree_bytes(dir / "five") == tree_bytes(dir / "env"));
  CHECK(bad.code == amd::cli::kConfigError);
  CHECK(bad.err.find("AMD_SEED") != std::string::npos);
}

TEST_CASE("spec schema violations exit 2 naming the field") {
  const auto dir = fresh_dir("schema");
  auto check_error = [&](json j, const std::string& field) {
    const auto spec = write_spec(dir, j);
    const auto r = run({"gen-data", "--spec", spec.string(), "--out", (dir / "d").string()});
    CHECK(r.code == amd::cli::kConfigError);
    CHECK_MESSAGE(r.err.find(field) != std::string::npos, r.err);
  };
  auto j = tiny_spec(dir);
  j["source"].erase("lexicon");
  check_error(j, "source.lexicon");
  j = tiny_spec(dir);
  j["target"]["shift"]["inversion"] = true;
  check_error(j, "target.shift.inversion");
  j = tiny_spec(dir);
  j["adapt"]["seed"] = 4;
  check_error(j, "adapt.seed");
  j = tiny_spec(dir);
  j["extra"] = 1;
  check_error(j, "spec.extra");
  j = tiny_spec(dir);
  j["train"]["lr"] = "fast";
  check_error(j, "train.lr");
  std::ofstream(dir / "broken.json") << "{\"seed\": ";
  CHECK(run({"gen-data", "--spec", (dir / "broken.json").string(), "--out", (dir / "d").string()}).code ==
        amd::cli::kConfigError);
}

TEST_CASE("io failures exit 3") {
  const auto dir = fresh_dir("io");
  const auto spec = write_spec(dir, tiny_spec(dir));
  CHECK(run({"gen-data", "--spec", (dir / "missing.json").string(), "--out", (dir / "d").string()}).code ==
        amd::cli::kIoError);
  CHECK(run({"adapt", "--spec", spec.string(), "--checkpoint", (dir / "missing.ckpt").string()}).code ==
        amd::cli::kIoError);
  std::ofstream(dir / "file") << "x";
  CHECK(run({"gen-data", "--spec", spec.string(), "--out", (dir / "file" / "sub").string()}).code ==
        amd::cli::kIoError);
  CHECK(run({"overlap", "--source", (dir / "nope.tsv").string(), "--target", (dir / "nope.tsv").string()}).code ==
        amd::cli::kIoError);
}

TEST_CASE("numerical divergence exits 4") {
  const auto dir = fresh_dir("diverge");
  auto j = tiny_spec(dir);
  j["train"]["lr"] = 1e300;
  const auto r = run({"pretrain", "--spec", write_spec(dir, j).string()});
  CHECK(r.code == amd::cli::kDivergence);
  CHECK(r.err.find("epoch 1") != std::string::npos);
}

TEST_CASE("adapting a checkpoint without BN statistics exits 5") {
  const auto dir = fresh_dir("contract");
  const auto spec = write_spec(dir, tiny_spec(dir));
  auto cfg = amd::model::model_config_from_json(tiny_spec(dir)["model"]);
  cfg.alphabet = amd::text::Alphabet::from_utf8("abc");
  amd::model::Recognizer fresh(cfg, 1);
  amd::model::save_checkpoint(dir / "fresh.ckpt", fresh, {});
  const auto r = run({"adapt", "--spec", spec.string(), "--checkpoint", (dir / "fresh.ckpt").string()});
  CHECK(r.code == amd::cli::kContractViolation);
}

TEST_CASE("pretrain, adapt and evaluate produce reproducible outputs") {
  const auto dir = fresh_dir("pipeline");
  const auto spec = write_spec(dir, tiny_spec(dir));
  const auto ckpt = pretrained(dir, spec);
  CHECK(fs::exists(dir / "out" / "pretrain_record.json"));
  CHECK(slurp(dir / "out" / "pretrain.log").find("pretrain epoch 1") != std::string::npos);
  CHECK(slurp(dir / "out" / "pretrain_record.json").find("wall") == std::string::npos);

  const auto a = run({"adapt", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "a1").string()});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  CHECK(line_count(a.out) == 1);
  CHECK(a.out.find("test CER") != std::string::npos);
  REQUIRE(run({"adapt", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "a2").string()}).code == 0);
  CHECK(slurp(dir / "a1" / "adapted.ckpt") == slurp(dir / "a2" / "adapted.ckpt"));
  CHECK(slurp(dir / "a1" / "adapt_record.json") == slurp(dir / "a2" / "adapt_record.json"));
  const auto record = json::parse(slurp(dir / "a1" / "adapt_record.json"));
  CHECK(record.contains("baseline_test_cer"));

  const auto manifest = (dir / "out" / "data" / "source" / "manifest.tsv").string();
  const auto e1 = run({"evaluate", "--checkpoint", ckpt.string(), "--manifest", manifest, "--report",
                       (dir / "report").string()});
  REQUIRE_MESSAGE(e1.code == 0, e1.err);
  CHECK(e1.out == run({"evaluate", "--checkpoint", ckpt.string(), "--manifest", manifest}).out);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.tsv"));
}

TEST_CASE("adapt with zero weights reports a no-op adaptation") {
  const auto dir = fresh_dir("noop");
  auto j = tiny_spec(dir);
  j["adapt"]["weights"] = {{"align", 0}, {"minimize", 0}, {"diversify", 0}};
  const auto spec = write_spec(dir, j);
  const auto ckpt = pretrained(dir, spec);
  const auto r = run({"adapt", "--spec", spec.string(), "--checkpoint", ckpt.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("no-op adaptation") != std::string::npos);
  CHECK(amd::model::load_checkpoint(dir / "out" / "adapted.ckpt").model.state() ==
        amd::model::load_checkpoint(ckpt).model.state());
}

TEST_CASE("adapt needs neither the source data nor target train transcripts") {
  const auto dir = fresh_dir("hygiene");
  const auto spec = write_spec(dir, tiny_spec(dir));
  const auto ckpt = pretrained(dir, spec);
  REQUIRE(run({"adapt", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "ref").string()}).code == 0);

  fs::remove_all(dir / "out" / "data" / "source");
  REQUIRE(run({"adapt", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "nosrc").string()}).code == 0);
  CHECK(slurp(dir / "ref" / "adapted.ckpt") == slurp(dir / "nosrc" / "adapted.ckpt"));

  // Same target through a manifest whose train transcripts are garbage.
  const fs::path tgt = dir / "ref" / "data" / "target";
  std::istringstream lines(slurp(tgt / "manifest.tsv"));
  std::ofstream garbled(tgt / "garbled.tsv");
  for (std::string line; std::getline(lines, line);) {
    if (line.size() > 6 && line.compare(line.size() - 6, 6, "\ttrain") == 0) {
      line = line.substr(0, line.find('\t')) + "\t#?@ not in the alphabet\ttrain";
    }
    garbled << line << '\n';
  }
  garbled.close();
  auto j = tiny_spec(dir);
  j["target"] = {{"manifest", (tgt / "garbled.tsv").string()}};
  const auto garbled_spec = write_spec(dir, j, "garbled.json");
  const auto r = run({"adapt", "--spec", garbled_spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "garbled").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "ref" / "adapted.ckpt") == slurp(dir / "garbled" / "adapted.ckpt"));
}

TEST_CASE("search writes ranked trials and --jobs does not change them") {
  const auto dir = fresh_dir("search");
  const auto spec = write_spec(dir, tiny_spec(dir));
  const auto ckpt = pretrained(dir, spec);
  const auto r = run({"search", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "s1").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(line_count(slurp(dir / "s1" / "search.tsv")) == 3);
  REQUIRE(run({"search", "--spec", spec.string(), "--checkpoint", ckpt.string(), "--out", (dir / "s2").string(),
               "--jobs", "2"}).code == 0);
  CHECK(slurp(dir / "s1" / "search.tsv") == slurp(dir / "s2" / "search.tsv"));
  CHECK(slurp(dir / "s1" / "search.json") == slurp(dir / "s2" / "search.json"));
}

TEST_CASE("ablate writes seven loss rows and 2^n-1 BN rows") {
  const auto dir = fresh_dir("ablate");
  auto j = tiny_spec(dir);
  j["search"]["trials"] = 1;
  j["adapt"]["max_epochs"] = 1;
  const auto spec = write_spec(dir, j);
  const auto ckpt = pretrained(dir, spec);
  const auto loss = run({"ablate", "--kind", "loss", "--spec", spec.string(), "--checkpoint", ckpt.string()});
  REQUIRE_MESSAGE(loss.code == 0, loss.err);
  const auto tsv = slurp(dir / "out" / "ablation_loss.tsv");
  CHECK(line_count(tsv) == 1 + 7);
  CHECK(tsv.rfind("L_a\tL_m\tL_d\tmedian_decrease\tinv\tslant\n", 0) == 0);
  const auto bn = run({"ablate", "--kind", "bn", "--spec", spec.string(), "--checkpoint", ckpt.string()});
  REQUIRE_MESSAGE(bn.code == 0, bn.err);
  CHECK(line_count(slurp(dir / "out" / "ablation_bn.tsv")) == 1 + 3);

  j["target"] = {{"manifest", (dir / "out" / "data" / "inv" / "manifest.tsv").string()}};
  const auto fixed = write_spec(dir, j, "fixed.json");
  CHECK(run({"ablate", "--kind", "loss", "--spec", fixed.string(), "--checkpoint", ckpt.string()}).code ==
        amd::cli::kConfigError);
}

TEST_CASE("overlap reports the covered share of the target alphabet") {
  const auto dir = fresh_dir("overlap");
  const auto spec = write_spec(dir, tiny_spec(dir));
  REQUIRE(run({"gen-data", "--spec", spec.string(), "--out", (dir / "d").string()}).code == 0);
  const auto r = run({"overlap", "--source", (dir / "d" / "source" / "manifest.tsv").string(), "--target",
                      (dir / "d" / "target" / "manifest.tsv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("overlap: 100%", 0) == 0);
}

TEST_CASE("evaluate on the shipped smoke checkpoint is deterministic") {
  const fs::path smoke = AMD_TEST_DATA_DIR "/smoke";
  const std::vector<std::string> args{"evaluate", "--checkpoint", (smoke / "smoke.ckpt").string(), "--manifest",
                                      (smoke / "manifest.tsv").string(), "--split", "all"};
  const auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == slurp(smoke / "expected_evaluate.txt"));
  CHECK(run(args).out == r.out);
}
