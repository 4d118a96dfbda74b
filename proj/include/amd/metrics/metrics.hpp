// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "amd/text/alphabet.hpp"
#include "json.hpp"

namespace amd::metrics {

/// Unit-cost edit distance.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Corpus-level character error rate in percent. Throws DomainError when the
/// total reference length is zero or the lists differ in length.
double cer(const std::vector<std::u32string>& refs, const std::vector<std::u32string>& hyps);

/// Word error rate in percent; every sample is one word, so this is the
/// exact-match error rate.
double wer(const std::vector<std::u32string>& refs, const std::vector<std::u32string>& hyps);

/// ceil(100 * |source ∩ target| / |target|).
int alphabet_overlap(const text::Alphabet& source, const text::Alphabet& target);

struct SampleResult {
  std::string id;
  std::u32string reference;
  std::u32string hypothesis;
  std::size_t distance = 0;
};

struct EvalReport {
  double cer = 0.0;
  double wer = 0.0;
  std::vector<SampleResult> samples;

  std::size_t count() const { return samples.size(); }
  nlohmann::json to_json() const;
  /// One row per sample: id, reference, hypothesis, distance.
  std::string to_tsv() const;
  void write(const std::filesystem::path& json_path, const std::filesystem::path& tsv_path) const;
};

EvalReport make_report(std::vector<std::string> ids, const std::vector<std::u32string>& refs,
                       const std::vector<std::u32string>& hyps);

}  // namespace amd::metrics
