// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "acceptance.hpp"

using namespace amd::acceptance;

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  std::string work_dir = "acceptance_work";
  std::vector<std::string> only;
  bool fresh = false;
  app.add_option("--work-dir", work_dir, "Scratch directory for generated data and runs")->capture_default_str();
  app.add_option("--only", only, "Run only these criterion ids")->delimiter(',');
  app.add_flag("--fresh", fresh, "Delete the work directory first instead of reusing pretrained sources");
  CLI11_PARSE(app, argc, argv);
  if (fresh) std::filesystem::remove_all(work_dir);

  auto criteria = oracle_criteria();
  for (auto& c : desk_criteria(work_dir)) criteria.push_back(std::move(c));
  const std::set<std::string> selected(only.begin(), only.end());

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Outcome o;
    const Stopwatch clock;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.1f", clock.seconds());
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.title << "): " << o.detail << " ["
              << secs << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
