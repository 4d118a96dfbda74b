// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/harness/training.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "amd/ctc/ctc.hpp"
#include "amd/errors.hpp"
#include "amd/harness/optimizer.hpp"
#include "amd/loss/amd_loss.hpp"
#include "amd/rng.hpp"

namespace amd::harness {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kPretrainShuffle = 0x7A;
constexpr std::uint64_t kAdaptShuffle = 0xAD;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_finite(double v, const char* what, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(v)) {
    throw DivergenceError(std::string(what) + " became non-finite at epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(batch));
  }
}

// Runs one optimization step, turning numerical failures inside the graph
// into a DivergenceError that names the epoch.
template <class Fn>
void guarded_step(std::size_t epoch, std::size_t batch, Fn fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw DivergenceError("numerical failure at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                          ": " + e.what());
  }
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

metrics::EvalReport evaluate(model::Recognizer& model, const std::vector<synth::Sample>& samples,
                             std::size_t batch_size) {
  ad::NoGradGuard no_grad;
  std::vector<std::string> ids;
  std::vector<std::u32string> refs, hyps;
  const auto& alphabet = model.config().alphabet;
  for (const auto& batch : synth::sequential_batches(samples, batch_size)) {
    const auto result = model.forward(batch.images, {model::Mode::kEval, {}, false});
    for (const auto& path : ctc::greedy_decode(result.frames)) hyps.push_back(alphabet.decode(ctc::collapse(path)));
    ids.insert(ids.end(), batch.ids.begin(), batch.ids.end());
    refs.insert(refs.end(), batch.transcripts.begin(), batch.transcripts.end());
  }
  return metrics::make_report(std::move(ids), refs, hyps);
}

TrainedModel pretrain(const model::ModelConfig& config, const std::vector<std::vector<synth::Sample>>& train_sources,
                      const std::vector<synth::Sample>& val, const TrainConfig& train,
                      const std::vector<synth::Sample>* test, const EpochCallback& on_epoch) {
  train.validate();
  if (val.empty()) throw ConfigError("pretrain: the validation split is empty");
  model::Recognizer model(config, derive_seed(train.seed, 0, kInitStream));
  model.set_all_trainable();
  Adam opt(model.trainable_parameters(), {.lr = train.lr});
  const synth::BatchLoader loader(train_sources, train.batch_size, train_sources.size() > 1,
                                  derive_seed(train.seed, 0, kPretrainShuffle));

  RunRecord record;
  record.stage = "pretrain";
  record.config = to_json(train);
  auto best_state = model.state();
  double best_cer = 0.0;

  for (std::size_t epoch = 1; epoch <= train.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord er;
    er.epoch = epoch;
    const auto batches = loader.epoch(epoch - 1);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      guarded_step(epoch, b, [&] {
        std::vector<ctc::Labels> targets;
        for (const auto& t : batches[b].transcripts) targets.push_back(config.alphabet.encode(t));
        const auto result = model.forward(batches[b].images, {model::Mode::kTrain, {}, false});
        const ad::Tensor loss = ctc::ctc_loss(result.frames, targets);
        check_finite(loss.item(), "CTC loss", epoch, b);
        er.ctc += loss.item() / static_cast<double>(batches.size());
        ad::backward(loss);
        opt.step();
      });
    }
    const auto report = evaluate(model, val, train.batch_size);
    er.val_cer = report.cer;
    er.val_wer = report.wer;
    er.wall_seconds = seconds_since(t0);
    record.epochs.push_back(er);
    if (on_epoch) on_epoch(er);
    if (epoch == 1 || er.val_cer < best_cer) {
      best_cer = er.val_cer;
      record.best_epoch = epoch;
      best_state = model.state();
    }
    if (epoch - record.best_epoch >= train.patience) break;
  }
  model.load_state(best_state);
  if (test) {
    const auto report = evaluate(model, *test, train.batch_size);
    record.test_cer = report.cer;
    record.test_wer = report.wer;
  }
  return {std::move(model), std::move(record)};
}

TrainedModel adapt(const model::Recognizer& source, const std::vector<synth::Sample>& target_train,
                   const std::vector<synth::Sample>& target_val, const AdaptConfig& config,
                   const std::vector<synth::Sample>* test, const EpochCallback& on_epoch) {
  config.validate();
  if (target_train.empty()) throw ConfigError("adapt: the target train split is empty");
  if (target_val.empty()) throw ConfigError("adapt: the target validation split is empty");
  for (const auto& s : target_train) {
    if (!s.transcript.empty()) throw ContractError("adapt: target train sample '" + s.id + "' carries a transcript");
  }
  for (const auto& bn : source.bn_layers()) {
    if (!bn.populated) throw ContractError("adapt: source BN layer " + std::to_string(bn.id()) + " has no running statistics");
  }

  model::Recognizer model = source.clone();
  const std::size_t bn_count = model.bn_layers().size();
  const std::set<std::size_t> scope = config.bn_layers.empty() ? std::set<std::size_t>{bn_count - 1} : config.bn_layers;
  const loss::SourceStats source_stats =
      config.bn_layers.empty() ? loss::SourceStats{} : loss::extract_source_stats(model, config.bn_layers);
  const model::ParameterPartition partition = model.set_trainable_scope(scope);
  const auto initial = model.state();

  RunRecord record;
  record.stage = "adapt";
  record.selection_uses_labels = true;
  record.config = to_json(config);
  record.config["trainable"] = partition.trainable;

  auto t0 = Clock::now();
  EpochRecord e0;
  {
    const auto report = evaluate(model, target_val, config.batch_size);
    e0.val_cer = report.cer;
    e0.val_wer = report.wer;
  }
  e0.wall_seconds = seconds_since(t0);
  record.epochs.push_back(e0);
  if (on_epoch) on_epoch(e0);
  double best_cer = e0.val_cer;
  auto best_state = initial;

  if (config.weights.all_zero()) {
    record.noop = true;
  } else {
    Adam opt(model.trainable_parameters(), {.lr = config.lr});
    const synth::BatchLoader loader({target_train}, config.batch_size, false,
                                    derive_seed(config.seed, 0, kAdaptShuffle));
    const model::ForwardOptions fwd{model::Mode::kAdapt, config.bn_layers, config.normalize_with_batch_stats};
    const double variance_floor = model.config().bn_eps;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
      t0 = Clock::now();
      EpochRecord er;
      er.epoch = epoch;
      const auto batches = loader.epoch(epoch - 1);
      const double n = static_cast<double>(batches.size());
      for (std::size_t b = 0; b < batches.size(); ++b) {
        guarded_step(epoch, b, [&] {
          const auto result = model.forward(batches[b].images, fwd);
          const auto rep = loss::amd_loss(result, source_stats, config.weights, variance_floor, config.diversify_form);
          check_finite(rep.value, "AMD loss", epoch, b);
          er.align += rep.align / n;
          er.minimize += rep.minimize / n;
          er.diversify += rep.diversify / n;
          ad::backward(rep.total);
          opt.step();
        });
      }
      er.loss = config.weights.align * er.align + config.weights.minimize * er.minimize +
                config.weights.diversify * er.diversify;
      const auto report = evaluate(model, target_val, config.batch_size);
      er.val_cer = report.cer;
      er.val_wer = report.wer;
      er.wall_seconds = seconds_since(t0);
      record.epochs.push_back(er);
      if (on_epoch) on_epoch(er);
      if (er.val_cer < best_cer) {
        best_cer = er.val_cer;
        record.best_epoch = epoch;
        best_state = model.state();
      }
      if (epoch - record.best_epoch >= config.patience) break;
    }
    model.load_state(best_state);
  }

  // Frozen-scope invariant over parameters and running statistics.
  const std::set<std::string> trainable(partition.trainable.begin(), partition.trainable.end());
  const auto final_state = model.state();
  for (const auto& [name, values] : initial) {
    if (trainable.contains(name)) continue;
    if (!same_bits(values, final_state.at(name))) {
      throw ContractError("adapt: frozen tensor '" + name + "' changed during adaptation");
    }
  }

  if (test) {
    const auto report = evaluate(model, *test, config.batch_size);
    record.test_cer = report.cer;
    record.test_wer = report.wer;
  }
  return {std::move(model), std::move(record)};
}

}  // namespace amd::harness
