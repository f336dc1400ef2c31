#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levylab/model.hpp"

namespace levylab {

/// Window, ensemble and tolerance settings. Unset fields fall back to the
/// defaults of the experiment that reads them.
struct RunSection {
  std::optional<double> t0;
  std::optional<double> t1;
  std::optional<double> step;
  std::optional<double> obs_step;
  std::optional<double> tol;
  std::optional<std::size_t> n_paths;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::vector<double>> y0;
};

struct ExperimentSection {
  std::string kind;  ///< empty when the subcommand decides
  // recurrence
  std::optional<double> tau;
  double epsilon = 0.05;
  double scan_window = 400.0;
  double tau_step = 0.01;
  double sup_horizon = 200.0;
  double t_step = 0.05;
  double min_tau = 6.283185307179586;
  std::vector<double> t_grid;
  int bootstrap = 20;
  int observed_components = 1;
  bool shift_coupling = true;
  int shift_points = 21;
  // stability
  std::optional<std::vector<double>> y0a;
  std::optional<std::vector<double>> y0b;
  std::optional<double> horizon;
  // simulate
  int csv_components = 0;
};

struct OutputSection {
  std::string directory = "levylab_out";
  bool csv = true;
};

struct ExperimentConfig {
  std::optional<SdeModel> model;
  RunSection run;
  ExperimentSection experiment;
  OutputSection output;
};

/// Schema-checked parse. Unknown keys and wrong types raise ConfigError with
/// the JSON key path; an explicit model must state K, omega, L, A0, b and the
/// small-jump rate.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
SdeModel parse_model(const nlohmann::json& j, const std::string& path = "model");

/// Preset names accepted by {"preset": ...}.
std::vector<std::string> preset_names();

}  // namespace levylab
