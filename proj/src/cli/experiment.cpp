// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/cli/experiment.hpp"

#include <fstream>
#include <set>

#include "amd/errors.hpp"
#include "amd/rng.hpp"

namespace amd::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSourceStream = 0xD5;
constexpr std::uint64_t kTargetStream = 0xD7;
constexpr std::uint64_t kLexiconStream = 0x1E;
constexpr std::uint64_t kTrainStream = 0x77;
constexpr std::uint64_t kAdaptStream = 0xAA;
constexpr std::uint64_t kSearchStream = 0x5E;

void check_keys(const nlohmann::json& j, const std::string& where, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError(where + "." + k + ": unknown key");
  }
}

void reject_seed(const nlohmann::json& j, const std::string& where) {
  if (j.is_object() && j.contains("seed")) {
    throw ConfigError(where + ".seed: seeds derive from the top-level seed");
  }
}

template <class T>
T get(const nlohmann::json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": wrong type");
  }
}

// Runs a nested parser and prefixes its error paths with the enclosing field.
template <class F>
auto scoped(const std::string& where, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    throw ConfigError(where + "." + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

DataSpec parse_data(const nlohmann::json& j, const std::string& where, const fs::path& base_dir,
                    std::uint64_t data_seed, std::uint64_t lexicon_seed) {
  DataSpec d;
  if (j.is_object() && j.contains("manifest")) {
    check_keys(j, where, {"manifest"});
    d.manifest = base_dir / get<std::string>(j.at("manifest"), where + ".manifest");
    return d;
  }
  check_keys(j, where, {"lexicon", "count", "alphabet", "splits", "height", "font", "augmentation", "shift"});
  reject_seed(j, where);
  auto& g = d.generate;
  g.seed = data_seed;
  if (!j.contains("count")) throw ConfigError(where + ".count: missing");
  g.count = get<std::size_t>(j.at("count"), where + ".count");
  if (j.contains("height")) g.height = get<std::size_t>(j.at("height"), where + ".height");
  if (j.contains("alphabet")) {
    g.alphabet = text::Alphabet::from_utf8(get<std::string>(j.at("alphabet"), where + ".alphabet"));
  }
  if (!j.contains("lexicon")) throw ConfigError(where + ".lexicon: missing");
  const auto& lex = j.at("lexicon");
  if (lex.is_array()) {
    for (const auto& w : lex) g.lexicon.push_back(text::utf8_decode(get<std::string>(w, where + ".lexicon[]")));
  } else {
    const std::string lw = where + ".lexicon";
    check_keys(lex, lw, {"size", "min_length", "max_length"});
    if (!g.alphabet) throw ConfigError(where + ".alphabet: required for a random lexicon");
    for (const char* k : {"size", "min_length", "max_length"}) {
      if (!lex.contains(k)) throw ConfigError(lw + "." + k + ": missing");
    }
    g.lexicon = synth::random_lexicon(*g.alphabet, get<std::size_t>(lex.at("size"), lw + ".size"),
                                      get<std::size_t>(lex.at("min_length"), lw + ".min_length"),
                                      get<std::size_t>(lex.at("max_length"), lw + ".max_length"), lexicon_seed);
  }
  if (g.lexicon.empty()) throw ConfigError(where + ".lexicon: must not be empty");
  if (j.contains("splits")) {
    const auto s = get<std::vector<double>>(j.at("splits"), where + ".splits");
    if (s.size() != 3) throw ConfigError(where + ".splits: expected [train, val, test]");
    g.splits = {s[0], s[1], s[2]};
  }
  if (j.contains("font")) g.font = scoped(where, [&] { return synth::font_from_json(j.at("font")); });
  if (j.contains("augmentation")) {
    g.pipeline = scoped(where, [&] { return synth::pipeline_from_json(j.at("augmentation"), g.height); });
  }
  if (j.contains("shift")) g.shift = scoped(where, [&] { return synth::shift_from_json(j.at("shift")); });
  return d;
}

}  // namespace

ExperimentSpec parse_experiment(const nlohmann::json& j, const fs::path& base_dir,
                                std::optional<std::uint64_t> seed_override) {
  check_keys(j, "spec", {"seed", "output", "model", "source", "target", "train", "adapt", "search", "scenarios"});
  ExperimentSpec s;
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j.at("seed"), "seed");
  if (seed_override) s.seed = *seed_override;
  if (j.contains("output")) s.output = get<std::string>(j.at("output"), "output");
  if (j.contains("model")) {
    s.model = j.at("model");
    model::model_config_from_json(s.model);  // shape check only; the alphabet comes later
  }
  const std::uint64_t lexicon_seed = derive_seed(s.seed, 0, kLexiconStream);
  if (j.contains("source")) {
    const auto& src = j.at("source");
    if (src.is_array()) {
      if (src.empty()) throw ConfigError("source: the list is empty");
      for (std::size_t i = 0; i < src.size(); ++i) {
        s.sources.push_back(parse_data(src[i], "source[" + std::to_string(i) + "]", base_dir,
                                       derive_seed(s.seed, i, kSourceStream), lexicon_seed));
      }
    } else {
      s.sources.push_back(parse_data(src, "source", base_dir, derive_seed(s.seed, 0, kSourceStream), lexicon_seed));
    }
  }
  if (j.contains("target")) s.target = parse_data(j.at("target"), "target", base_dir, derive_seed(s.seed, 0, kTargetStream), lexicon_seed);
  if (j.contains("train")) {
    reject_seed(j.at("train"), "train");
    s.train = harness::train_config_from_json(j.at("train"), "train");
  }
  if (j.contains("adapt")) {
    reject_seed(j.at("adapt"), "adapt");
    s.adapt = harness::adapt_config_from_json(j.at("adapt"), "adapt");
  }
  if (j.contains("search")) {
    reject_seed(j.at("search"), "search");
    s.search = harness::search_config_from_json(j.at("search"), "search");
  }
  s.train.seed = derive_seed(s.seed, 0, kTrainStream);
  s.adapt.seed = derive_seed(s.seed, 0, kAdaptStream);
  s.search.seed = derive_seed(s.seed, 0, kSearchStream);
  if (j.contains("scenarios")) {
    std::size_t i = 0;
    std::set<std::string> names;
    for (const auto& sc : j.at("scenarios")) {
      const std::string where = "scenarios[" + std::to_string(i++) + "]";
      check_keys(sc, where, {"name", "shift"});
      if (!sc.contains("name")) throw ConfigError(where + ".name: missing");
      harness::Scenario scenario;
      scenario.name = get<std::string>(sc.at("name"), where + ".name");
      if (scenario.name.empty() || scenario.name.find_first_of("/\\\t\n") != std::string::npos) {
        throw ConfigError(where + ".name: must be a plain non-empty name");
      }
      if (!names.insert(scenario.name).second) throw ConfigError(where + ".name: duplicate scenario");
      if (sc.contains("shift")) scenario.shift = scoped(where, [&] { return synth::shift_from_json(sc.at("shift")); });
      s.scenarios.push_back(std::move(scenario));
    }
  }
  return s;
}

ExperimentSpec load_experiment(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("spec " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment(j, path.parent_path(), seed_override);
}

fs::path materialize(const DataSpec& data, const fs::path& out_dir) {
  if (data.manifest) return *data.manifest;
  synth::generate_dataset(data.generate, out_dir);
  return out_dir / "manifest.tsv";
}

model::ModelConfig model_config(const ExperimentSpec& spec, const text::Alphabet& alphabet) {
  model::ModelConfig cfg = model::model_config_from_json(spec.model);
  if (spec.model.contains("alphabet") && !(cfg.alphabet == alphabet)) {
    throw ConfigError("model.alphabet: differs from the source manifest alphabet");
  }
  cfg.alphabet = alphabet;
  cfg.validate();
  return cfg;
}

harness::TargetData load_target(const fs::path& manifest, std::size_t height) {
  harness::TargetData d;
  d.train_images = synth::load_images(synth::read_image_list(manifest), "train", height);
  d.val = synth::load_samples(synth::read_manifest(manifest, "val"), "val", height);
  d.test = synth::load_samples(synth::read_manifest(manifest, "test"), "test", height);
  return d;
}

}  // namespace amd::cli
