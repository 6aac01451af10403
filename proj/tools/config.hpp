#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qwline/analysis.hpp"

namespace qwline::cli {

inline constexpr const char* kToolVersion = "0.1.0";

//! Raised for malformed command lines or config files.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Fully explicit description of one experiment. This is what gets embedded
//! in every output file; re-running an embedded config reproduces the file.
//! Execution details (threads, output path/format) are deliberately not part
//! of the experiment identity.
struct ExperimentConfig {
  std::string model;  // coherent | measure | links | classical
  int steps = 100;
  int trajectories = 1000;
  std::uint64_t seed = 1;
  double theta = 0.78539816339744830961;  // pi/4
  //! (Re up, Im up, Re down, Im down); default (1, i)/sqrt(2)
  std::array<double, 4> qubit = {0.70710678118654752, 0.0, 0.0,
                                 0.70710678118654752};
  std::optional<int> period;                            // measure
  std::optional<std::pair<int, int>> interval_uniform;  // measure
  std::optional<double> p;                              // links / classical
  std::vector<int> snapshots;

  //! Throws usage_error naming the offending key(s) on any inconsistency.
  void validate() const;

  Model model_enum() const;
  EnsembleSpec to_spec() const;

  nlohmann::json to_json() const;
  //! Strict parse: unknown keys are rejected with their names.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

//! Runtime options that do not affect results.
struct ExecutionOptions {
  std::string out;             // output path or stem; empty = derive from model
  std::string format = "csv";  // csv | json
  int threads = 0;             // 0 = hardware default
};

}  // namespace qwline::cli
