// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "amd/errors.hpp"
#include "amd/harness/training.hpp"
#include "amd/rng.hpp"

namespace amd::harness {

namespace {

constexpr std::uint64_t kTrialStream = 0x5EA;
constexpr std::uint64_t kTrialSeedStream = 0xADA;

// Runs fn(0..n-1) on up to `jobs` threads. Results must be written to
// per-index slots; the first exception (by index) is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> s(4);
  s[0].name = "slant";
  s[0].shift.slant_deg = 30.0;
  s[1].name = "thickness";
  s[1].shift.thickness_delta = 1;
  s[2].name = "inversion";
  s[2].shift.invert = true;
  s[3].name = "noise";
  s[3].shift.noise_sigma = 0.3;
  return s;
}

ScenarioData make_scenario(model::Recognizer& source, std::string name, TargetData data, std::size_t batch_size) {
  ScenarioData s;
  s.name = std::move(name);
  s.baseline_test_cer = evaluate(source, data.test, batch_size).cer;
  s.data = std::move(data);
  return s;
}

double relative_decrease(double baseline, double adapted) {
  return baseline > 0.0 ? 100.0 * (baseline - adapted) / baseline : 0.0;
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<AdaptConfig> sample_trials(const SearchConfig& search, const AdaptConfig& base, std::size_t bn_count,
                                       std::array<bool, 3> active) {
  search.validate();
  if (bn_count == 0 || bn_count > 20) throw ConfigError("search: unsupported BN layer count");
  for (const auto& s : search.bn_subsets) {
    if (*s.rbegin() >= bn_count) throw ConfigError("search.bn_subsets: layer id out of range");
  }
  const bool masked = !(active[0] && active[1] && active[2]);
  std::vector<double> grid = search.weight_grid;
  if (masked) {
    std::erase_if(grid, [](double w) { return w == 0.0; });
    if (grid.empty()) throw ConfigError("search.weight_grid: a term ablation needs a non-zero weight");
  }
  const std::uint64_t subset_count = (std::uint64_t{1} << bn_count) - 1;
  const double log_lo = std::log(search.lr_min), log_hi = std::log(search.lr_max);

  std::vector<AdaptConfig> out;
  for (std::size_t t = 0; t < search.trials; ++t) {
    SplitMix64 rng(derive_seed(search.seed, t, kTrialStream));
    AdaptConfig c = base;
    double* w[3] = {&c.weights.align, &c.weights.minimize, &c.weights.diversify};
    for (int i = 0; i < 3; ++i) {
      const double draw = grid[rng.below(grid.size())];
      *w[i] = active[static_cast<std::size_t>(i)] ? draw : 0.0;
    }
    c.lr = std::exp(rng.uniform(log_lo, log_hi));
    c.bn_layers.clear();
    if (search.bn_subsets.empty()) {
      const std::uint64_t mask = 1 + rng.below(subset_count);
      for (std::size_t b = 0; b < bn_count; ++b) {
        if (mask >> b & 1) c.bn_layers.insert(b);
      }
    } else {
      c.bn_layers = search.bn_subsets[rng.below(search.bn_subsets.size())];
    }
    c.seed = derive_seed(search.seed, t, kTrialSeedStream);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Trial> random_search(const model::Recognizer& source, const TargetData& target, const AdaptConfig& base,
                                 const SearchConfig& search, std::array<bool, 3> active) {
  const auto configs = sample_trials(search, base, source.bn_layers().size(), active);
  std::vector<Trial> trials(configs.size());
  parallel_for(configs.size(), search.jobs, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    auto run = adapt(source, target.train_images, target.val, configs[i], &target.test);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    trials[i] = {i, configs[i], run.record.best_val_cer(), *run.record.test_cer, run.record.best_epoch, wall.count()};
  });
  std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) { return a.val_cer < b.val_cer; });
  return trials;
}

std::vector<std::array<bool, 3>> loss_term_subsets() {
  return {{true, false, false}, {false, true, false}, {false, false, true}, {true, true, false},
          {true, false, true},  {false, true, true},  {true, true, true}};
}

std::vector<LossAblationRow> ablate_loss_terms(const model::Recognizer& source,
                                               const std::vector<ScenarioData>& scenarios, const AdaptConfig& base,
                                               const SearchConfig& search) {
  if (scenarios.empty()) throw ConfigError("ablation: no scenarios");
  std::vector<LossAblationRow> rows;
  for (const auto& terms : loss_term_subsets()) {
    LossAblationRow row;
    row.terms = terms;
    for (const auto& s : scenarios) {
      const auto trials = random_search(source, s.data, base, search, terms);
      row.per_scenario.push_back(relative_decrease(s.baseline_test_cer, trials.front().test_cer));
    }
    row.median_decrease = median(row.per_scenario);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_tsv(const std::vector<LossAblationRow>& rows, const std::vector<ScenarioData>& scenarios) {
  std::ostringstream os;
  os << "L_a\tL_m\tL_d\tmedian_decrease";
  for (const auto& s : scenarios) os << '\t' << s.name;
  os << '\n';
  for (const auto& r : rows) {
    os << r.terms[0] << '\t' << r.terms[1] << '\t' << r.terms[2] << '\t' << fmt(r.median_decrease);
    for (double d : r.per_scenario) os << '\t' << fmt(d);
    os << '\n';
  }
  return os.str();
}

std::vector<BnAblationRow> ablate_bn_layers(const model::Recognizer& source,
                                            const std::vector<ScenarioData>& scenarios, const AdaptConfig& base,
                                            std::size_t jobs, const std::vector<std::set<std::size_t>>& subsets) {
  if (scenarios.empty()) throw ConfigError("ablation: no scenarios");
  const std::size_t n = source.bn_layers().size();
  std::vector<std::set<std::size_t>> sweep = subsets;
  if (sweep.empty()) {
    if (n > 4) throw ConfigError("ablation: more than 4 BN layers needs an explicit subset list");
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
      std::set<std::size_t> s;
      for (std::size_t b = 0; b < n; ++b) {
        if (mask >> b & 1) s.insert(b);
      }
      sweep.push_back(std::move(s));
    }
  }
  for (const auto& s : sweep) {
    if (s.empty() || *s.rbegin() >= n) throw ConfigError("ablation: invalid BN subset " + layers_label(s));
  }
  std::vector<BnAblationRow> rows(sweep.size());
  const std::size_t cells = sweep.size() * scenarios.size();
  std::vector<double> decrease(cells);
  parallel_for(cells, jobs, [&](std::size_t i) {
    const auto& sc = scenarios[i % scenarios.size()];
    AdaptConfig cfg = base;
    cfg.bn_layers = sweep[i / scenarios.size()];
    const auto run = adapt(source, sc.data.train_images, sc.data.val, cfg, &sc.data.test);
    decrease[i] = relative_decrease(sc.baseline_test_cer, *run.record.test_cer);
  });
  for (std::size_t r = 0; r < sweep.size(); ++r) {
    rows[r].layers = sweep[r];
    rows[r].per_scenario.assign(decrease.begin() + static_cast<std::ptrdiff_t>(r * scenarios.size()),
                                decrease.begin() + static_cast<std::ptrdiff_t>((r + 1) * scenarios.size()));
    rows[r].median_decrease = median(rows[r].per_scenario);
    rows[r].max_decrease = *std::max_element(rows[r].per_scenario.begin(), rows[r].per_scenario.end());
  }
  return rows;
}

std::string to_tsv(const std::vector<BnAblationRow>& rows, const std::vector<ScenarioData>& scenarios) {
  std::ostringstream os;
  os << "layers\tmedian_decrease\tmax_decrease";
  for (const auto& s : scenarios) os << '\t' << s.name;
  os << '\n';
  for (const auto& r : rows) {
    os << layers_label(r.layers) << '\t' << fmt(r.median_decrease) << '\t' << fmt(r.max_decrease);
    for (double d : r.per_scenario) os << '\t' << fmt(d);
    os << '\n';
  }
  return os.str();
}

std::string layers_label(const std::set<std::size_t>& layers) {
  std::string out;
  for (auto id : layers) out += (out.empty() ? "" : "+") + std::to_string(id);
  return out;
}

}  // namespace amd::harness
