#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ztsim/world.hpp"

namespace ztsim::harness {

/// One scripted action plus the verdict it must produce. "ok" means the
/// operation succeeds; any other expectation is an error-code name from the
/// shared vocabulary (e.g. "spoofed-quote", "rollback-detected").
struct ScenarioStep {
  std::string action;
  std::map<std::string, std::string> args;
  std::string expect = "ok";
};

struct Scenario {
  std::string name;
  std::string description;
  WorldConfig config;
  std::vector<ScenarioStep> steps;

  static Result<Scenario> from_json(const std::string& text);
};

struct StepOutcome {
  std::string action;
  std::string expected;
  std::string actual;
  std::string detail;
  bool matched = false;
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<StepOutcome> steps;
  bool contained = false;  // every expectation matched

  std::string to_json(bool pretty = false) const;
  std::string to_text() const;
};

/// Runs a scenario script against a fresh world. `seed_override` replaces the
/// scenario config's seed when set.
ScenarioReport run_scenario(const Scenario& scenario,
                            std::optional<std::uint64_t> seed_override);

/// The built-in attack library (embedded copies of scenarios/*.json).
std::vector<std::string> builtin_attack_names();
Result<Scenario> builtin_attack(const std::string& name);

}  // namespace ztsim::harness
