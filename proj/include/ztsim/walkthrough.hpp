#pragma once

#include <string>
#include <vector>

#include "ztsim/world.hpp"

namespace ztsim::harness {

struct StepReport {
  int index = 0;
  std::string name;
  std::string status;  // "ok", "broken", "skipped"
  std::string detail;
};

struct WalkthroughReport {
  std::uint64_t seed = 0;
  int fault = 0;
  std::vector<StepReport> steps;
  bool all_green = false;

  std::string to_json(bool pretty = false) const;
  std::string to_text() const;
};

inline constexpr int kWalkthroughSteps = 7;

/// Fault injections, one per step; the index names the step whose
/// verification breaks:
///   1 genesis rejected (no authorized OS digests)
///   2 first KMS node runs unregistered code
///   3 candidate node admitted without on-chain registration
///   4 gateway quote tampered in flight
///   5 demo app registered twice
///   6 registered app digest corrupted before deployment
///   7 gateway identity re-rooted in a rogue KMS
WalkthroughReport run_walkthrough(std::uint64_t seed, int fault = 0,
                                  const WorldConfig* base_config = nullptr);

}  // namespace ztsim::harness
