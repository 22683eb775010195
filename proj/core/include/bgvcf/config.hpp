#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgvcf/grassmann.hpp"
#include "bgvcf/sim.hpp"
#include "bgvcf/thpd.hpp"

namespace bgvcf {

/// Estimator labels understood by the pipeline.
inline const std::vector<std::string> kEstimatorLabels = {
    "bgvcf", "gvcf", "lsmi", "scm", "gip", "euclidean_mean", "optimal"};

struct WindowConfig {
  int num_training = 25;
  int num_guard = 2;
  int cut_index = 36;
  /// Inclusive CUT sweep for the output-power table; off when unset.
  std::optional<int> sweep_first;
  std::optional<int> sweep_last;
  /// Explicit inclusive training range; replaces the sliding window when set
  /// (the CUT and its guard cells are still excluded).
  std::optional<int> training_first;
  std::optional<int> training_last;
};

struct PipelineConfig {
  sim::ScenarioConfig scenario;
  std::vector<sim::TargetSpec> targets = default_targets(scenario.noise_variance, 10.0);
  WindowConfig window;
  thpd::BurgOptions burg;
  grassmann::OptimizerConfig optimizer;
  std::vector<std::string> estimators = {"bgvcf", "gvcf", "lsmi", "scm", "gip", "euclidean_mean"};
  double lsmi_loading = 10.0;
  double gip_keep = 0.8;
  /// Look direction; defaults to the first target's frequencies.
  std::optional<double> look_doppler;
  std::optional<double> look_spatial;
  int grid_points = 101;
  std::vector<double> input_scnr_db = {-40, -35, -30, -25, -20, -15, -10, -5};
  std::optional<std::filesystem::path> input;  // CPI file; simulate when unset
  std::filesystem::path output_dir = "out";

  /// Range-spread targets of the reference experiment: cells 30-32 at
  /// (0.25, 0) and cells 39-41 at (-0.1, 0).
  static std::vector<sim::TargetSpec> default_targets(double noise_variance, double snr_db);

  [[nodiscard]] double resolved_look_doppler() const;
  [[nodiscard]] double resolved_look_spatial() const;
  [[nodiscard]] int resolved_subspace_dim() const;

  void validate() const;
};

/// JSON <-> config. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);
nlohmann::json to_json(const sim::ScenarioConfig& scenario);
sim::ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const sim::TargetSpec& target);
sim::TargetSpec target_from_json(const nlohmann::json& j, double noise_variance);

/// Reads a .json or .toml file; the extension picks the parser.
PipelineConfig load_config(const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical JSON form; independent of output_dir.
std::string config_hash(const PipelineConfig& config);

}  // namespace bgvcf
