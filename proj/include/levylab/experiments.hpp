#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "levylab/config.hpp"
#include "levylab/model.hpp"

namespace levylab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitThreshold = 3;
inline constexpr int kExitBlowup = 4;

struct Artifact {
  std::string name;
  std::string content;
};

/// Summary JSON plus data files of one run. Every number in the summary is an
/// object {"value": v, "ref": "<definition of v>"}.
struct ExperimentResult {
  nlohmann::ordered_json summary;
  std::vector<Artifact> files;
  int exit_code = kExitOk;
};

/// Runs one of check, simulate, bounded, recurrence, stability, example61,
/// example62. Library errors propagate; see exit_code_for().
ExperimentResult run_experiment(const std::string& kind, const ExperimentConfig& config);

/// Exit code for an exception escaping run_experiment.
int exit_code_for(const std::exception& e);

/// Writes summary.json (2-space indent) and, when csv is set, the data files.
void write_result(const ExperimentResult& result, const std::string& directory, bool csv);
std::string dump_summary(const nlohmann::ordered_json& summary);

nlohmann::ordered_json constants_json(const SdeModel& model);
nlohmann::ordered_json conditions_json(const ConditionReport& report);
nlohmann::ordered_json model_json(const SdeModel& model);

}  // namespace levylab
