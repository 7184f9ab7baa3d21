#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qflow/oracle.hpp"

namespace qflow {

// Oracle battery: every fast path compared against its brute-force
// reference at configurable sizes.  Used by the CLI selftest subcommand
// and by the acceptance suite.

struct SelftestOptions {
  int n_max = 6;                 // largest tuple length, must be <= 6
  int sym_samples = 10000;       // random tuples for the S_k suite
  int cone_samples = 10000;      // Gamma^k samples for ellipticity
  int concavity_samples = 1000;  // midpoint checks
  int gradient_samples = 1000;   // interior points per (k, l) pair
  int mixed_samples = 1000;      // Hermitian pairs for mixed densities
  int path_fields = 50;          // random toy fields for J_l
  std::uint64_t seed = 42;
  bool inject_fault = false;     // perturb the fast S_k before comparing
};

struct CheckOutcome {
  std::string name;
  double max_deviation = 0.0;
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;
  // the reference route, for checks that compare against an oracle; the
  // worst observed oracle value rides along for the record
  std::optional<OracleResult> oracle;
};

std::vector<CheckOutcome> run_selftest(const SelftestOptions& options);

bool all_passed(const std::vector<CheckOutcome>& outcomes);

}  // namespace qflow
