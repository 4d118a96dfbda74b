// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/metrics/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "amd/errors.hpp"

namespace amd::metrics {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double cer(const std::vector<std::u32string>& refs, const std::vector<std::u32string>& hyps) {
  if (refs.size() != hyps.size()) throw DomainError("cer: reference and hypothesis counts differ");
  std::size_t edits = 0, chars = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    edits += levenshtein(refs[i], hyps[i]);
    chars += refs[i].size();
  }
  if (chars == 0) throw DomainError("cer: empty reference corpus");
  return 100.0 * static_cast<double>(edits) / static_cast<double>(chars);
}

double wer(const std::vector<std::u32string>& refs, const std::vector<std::u32string>& hyps) {
  if (refs.size() != hyps.size()) throw DomainError("wer: reference and hypothesis counts differ");
  if (refs.empty()) throw DomainError("wer: empty corpus");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) wrong += refs[i] == hyps[i] ? 0 : 1;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(refs.size());
}

int alphabet_overlap(const text::Alphabet& source, const text::Alphabet& target) {
  if (target.size() == 0) throw DomainError("alphabet_overlap: empty target alphabet");
  std::size_t shared = 0;
  for (char32_t c : target.chars()) shared += source.contains(c) ? 1 : 0;
  return static_cast<int>((100 * shared + target.size() - 1) / target.size());
}

EvalReport make_report(std::vector<std::string> ids, const std::vector<std::u32string>& refs,
                       const std::vector<std::u32string>& hyps) {
  if (ids.size() != refs.size()) throw DomainError("make_report: id and reference counts differ");
  EvalReport r;
  r.cer = cer(refs, hyps);
  r.wer = wer(refs, hyps);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    r.samples.push_back({std::move(ids[i]), refs[i], hyps[i], levenshtein(refs[i], hyps[i])});
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& x : samples) {
    s.push_back({{"id", x.id},
                  {"reference", text::utf8_encode(x.reference)},
                  {"hypothesis", text::utf8_encode(x.hypothesis)},
                  {"distance", x.distance}});
  }
  return {{"cer", cer}, {"wer", wer}, {"count", count()}, {"samples", s}};
}

std::string EvalReport::to_tsv() const {
  std::string out = "id\treference\thypothesis\tdistance\n";
  for (const auto& x : samples) {
    out += x.id + '\t' + text::utf8_encode(x.reference) + '\t' + text::utf8_encode(x.hypothesis) + '\t' +
           std::to_string(x.distance) + '\n';
  }
  return out;
}

void EvalReport::write(const std::filesystem::path& json_path, const std::filesystem::path& tsv_path) const {
  std::ofstream j(json_path, std::ios::binary | std::ios::trunc);
  std::ofstream t(tsv_path, std::ios::binary | std::ios::trunc);
  if (!j || !t) throw IoError("cannot write evaluation report next to " + json_path.string());
  j << to_json().dump(2) << '\n';
  t << to_tsv();
  if (!j || !t) throw IoError("failed writing evaluation report " + json_path.string());
}

}  // namespace amd::metrics
