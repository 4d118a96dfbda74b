// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/harness/run_record.hpp"

#include <algorithm>
#include <fstream>

#include "amd/errors.hpp"

namespace amd::harness {

double RunRecord::best_val_cer() const {
  for (const auto& e : epochs) {
    if (e.epoch == best_epoch) return e.val_cer;
  }
  throw ContractError("run record has no entry for its best epoch");
}

nlohmann::json RunRecord::to_json(bool with_timing) const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json j = {{"epoch", e.epoch}, {"val_cer", e.val_cer}, {"val_wer", e.val_wer}};
    if (stage == "pretrain") {
      j["ctc"] = e.ctc;
    } else {
      j["align"] = e.align;
      j["minimize"] = e.minimize;
      j["diversify"] = e.diversify;
      j["loss"] = e.loss;
    }
    if (with_timing) j["wall_seconds"] = e.wall_seconds;
    eps.push_back(std::move(j));
  }
  nlohmann::json out = {{"stage", stage},
                        {"epochs", eps},
                        {"best_epoch", best_epoch},
                        {"best_val_cer", epochs.empty() ? 0.0 : best_val_cer()},
                        {"noop", noop},
                        {"config", config}};
  if (selection_uses_labels) out["validation_labels"] = "selection-only";
  if (test_cer) out["test_cer"] = *test_cer;
  if (test_wer) out["test_wer"] = *test_wer;
  return out;
}

void RunRecord::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace amd::harness
