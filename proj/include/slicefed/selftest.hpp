#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slicefed::selftest {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

CheckResult gradient_check(std::uint64_t seed);       // 1
CheckResult fedavg_algebra(std::uint64_t seed);       // 2
CheckResult dual_projection(std::uint64_t seed);      // 3
CheckResult simplex_feasibility(std::uint64_t seed);  // 4
CheckResult smoke_determinism(std::uint64_t seed);    // 5
CheckResult sampler_moments(std::uint64_t seed);      // 6
CheckResult critic_fixed_point(std::uint64_t seed);   // 7
/// 20-round smoke training over five seeds: finite, fast, g2 settling.
CheckResult smoke_training(std::uint64_t seed);       // 12

/// Checks 1-7, in order.
std::vector<CheckResult> run_core_checks(std::uint64_t seed = 20240607);

std::string format_result(const CheckResult& r);

}  // namespace slicefed::selftest
