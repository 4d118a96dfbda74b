// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/harness/config.hpp"

#include <algorithm>
#include <string>

#include "amd/errors.hpp"

namespace amd::harness {

namespace {

void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(where + "." + key + ": unknown key");
    }
  }
}

template <class T>
void read(const nlohmann::json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

const char* form_name(loss::DiversifyForm f) {
  switch (f) {
    case loss::DiversifyForm::kAveragedProbs: return "averaged_probs";
    case loss::DiversifyForm::kAveragedLogits: return "averaged_logits";
    case loss::DiversifyForm::kLiteral: return "literal";
  }
  return "";
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train.lr: must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size: must be positive");
  if (patience == 0) throw ConfigError("train.patience: must be at least 1");
  if (max_epochs == 0) throw ConfigError("train.max_epochs: must be at least 1");
}

void AdaptConfig::validate() const {
  weights.validate();
  if (!(lr > 0.0)) throw ConfigError("adapt.lr: must be positive");
  if (batch_size == 0) throw ConfigError("adapt.batch_size: must be positive");
  if (patience == 0) throw ConfigError("adapt.patience: must be at least 1");
  if (max_epochs == 0) throw ConfigError("adapt.max_epochs: must be at least 1");
  if (weights.align > 0.0 && bn_layers.empty()) {
    throw ConfigError("adapt.bn_layers: the align term needs at least one BN layer");
  }
}

void SearchConfig::validate() const {
  if (trials == 0) throw ConfigError("search.trials: must be at least 1");
  if (!(lr_min > 0.0) || lr_max < lr_min) throw ConfigError("search.lr_min/lr_max: need 0 < lr_min <= lr_max");
  if (weight_grid.empty()) throw ConfigError("search.weight_grid: must not be empty");
  for (double w : weight_grid) {
    if (!(w >= 0.0)) throw ConfigError("search.weight_grid: weights must be non-negative");
  }
  for (const auto& s : bn_subsets) {
    if (s.empty()) throw ConfigError("search.bn_subsets: subsets must be non-empty");
  }
  if (jobs == 0) throw ConfigError("search.jobs: must be at least 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr}, {"batch_size", c.batch_size}, {"patience", c.patience}, {"max_epochs", c.max_epochs},
          {"seed", c.seed}};
}

nlohmann::json to_json(const AdaptConfig& c) {
  return {{"weights", {{"align", c.weights.align}, {"minimize", c.weights.minimize},
                       {"diversify", c.weights.diversify}, {"eps_p", c.weights.eps_p}}},
          {"bn_layers", c.bn_layers},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"patience", c.patience},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"normalize_with_batch_stats", c.normalize_with_batch_stats},
          {"diversify_form", form_name(c.diversify_form)}};
}

nlohmann::json to_json(const SearchConfig& c) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& s : c.bn_subsets) subsets.push_back(s);
  return {{"trials", c.trials}, {"seed", c.seed},         {"lr_min", c.lr_min},  {"lr_max", c.lr_max},
          {"weight_grid", c.weight_grid}, {"bn_subsets", subsets}, {"jobs", c.jobs}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, where, {"lr", "batch_size", "patience", "max_epochs", "seed"});
  TrainConfig c;
  read(j, where, "lr", c.lr);
  read(j, where, "batch_size", c.batch_size);
  read(j, where, "patience", c.patience);
  read(j, where, "max_epochs", c.max_epochs);
  read(j, where, "seed", c.seed);
  c.validate();
  return c;
}

AdaptConfig adapt_config_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, where, {"weights", "bn_layers", "lr", "batch_size", "patience", "max_epochs", "seed",
                        "normalize_with_batch_stats", "diversify_form"});
  AdaptConfig c;
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    const std::string ww = where + ".weights";
    check_keys(w, ww, {"align", "minimize", "diversify", "eps_p"});
    read(w, ww, "align", c.weights.align);
    read(w, ww, "minimize", c.weights.minimize);
    read(w, ww, "diversify", c.weights.diversify);
    read(w, ww, "eps_p", c.weights.eps_p);
  }
  read(j, where, "bn_layers", c.bn_layers);
  read(j, where, "lr", c.lr);
  read(j, where, "batch_size", c.batch_size);
  read(j, where, "patience", c.patience);
  read(j, where, "max_epochs", c.max_epochs);
  read(j, where, "seed", c.seed);
  read(j, where, "normalize_with_batch_stats", c.normalize_with_batch_stats);
  if (j.contains("diversify_form")) {
    std::string f;
    read(j, where, "diversify_form", f);
    if (f == "averaged_probs") c.diversify_form = loss::DiversifyForm::kAveragedProbs;
    else if (f == "averaged_logits") c.diversify_form = loss::DiversifyForm::kAveragedLogits;
    else if (f == "literal") c.diversify_form = loss::DiversifyForm::kLiteral;
    else throw ConfigError(where + ".diversify_form: unknown form '" + f + "'");
  }
  c.validate();
  return c;
}

SearchConfig search_config_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, where, {"trials", "seed", "lr_min", "lr_max", "weight_grid", "bn_subsets", "jobs"});
  SearchConfig c;
  read(j, where, "trials", c.trials);
  read(j, where, "seed", c.seed);
  read(j, where, "lr_min", c.lr_min);
  read(j, where, "lr_max", c.lr_max);
  read(j, where, "weight_grid", c.weight_grid);
  read(j, where, "bn_subsets", c.bn_subsets);
  read(j, where, "jobs", c.jobs);
  c.validate();
  return c;
}

}  // namespace amd::harness
