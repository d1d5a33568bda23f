#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "haarbridge/montecarlo.hpp"

namespace haarbridge {

struct SuiteOptions {
  std::uint64_t seed = 7;
  int threads = 0;         // 0 = hardware concurrency
  std::string out_dir;     // empty = no artifacts on disk
};

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
};

// Runs verification criteria 1-11, printing one PASS/FAIL line per criterion
// to `log` and, when out_dir is set, writing one JSON artifact per criterion
// plus summary.json.  Artifacts depend on the seed but never on the thread
// count, so two runs that differ only in threads are byte-identical.
SuiteResult run_suite(const SuiteOptions& opts, std::ostream& log);

}  // namespace haarbridge
