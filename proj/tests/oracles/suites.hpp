#pragma once

// Library-versus-oracle equivalence suites. Shared by the acceptance binary
// and `ccgnn selftest`. Each returns one verdict with the measured quantity.

#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

CheckResult check_gradients(std::uint64_t seed);
CheckResult check_standardized_decorrelation(std::uint64_t seed);
CheckResult check_graph_builder();
CheckResult check_cortical_transcription(std::uint64_t seed);
CheckResult check_memory_scan(std::uint64_t seed);
CheckResult check_activation_metrics();
CheckResult check_wilcoxon(std::uint64_t seed);
CheckResult check_signal_pipeline(std::uint64_t seed);

/// Every suite above, in order.
std::vector<CheckResult> run_all(std::uint64_t seed);

}  // namespace oracle
