#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgvcf/config.hpp"
#include "bgvcf/grassmann.hpp"
#include "bgvcf/screening.hpp"
#include "bgvcf/sim.hpp"
#include "bgvcf/stap.hpp"
#include "bgvcf/thpd.hpp"

namespace bgvcf::pipeline {

/// The q cells nearest `cut`, skipping the CUT and `guard` cells on each
/// side. Cells are taken alternately left then right, one-sided once an edge
/// is reached. Sorted ascending.
std::vector<int> select_training_window(int num_cells, int cut, int q, int guard);

/// Explicit inclusive range with the CUT and its guard cells removed.
std::vector<int> select_training_range(int num_cells, int cut, int first, int last, int guard);

/// Training cells for `cut` under the config's window rules.
std::vector<int> training_cells(const PipelineConfig& config, int num_cells, int cut);

/// Per-window intermediate products shared by all estimators.
struct TrainingSet {
  std::vector<int> cells;
  std::vector<sim::SpaceTimeSnapshot> snapshots;
  std::vector<thpd::ThpdCovariance> thpd;
  screening::ScreeningResult screening;  // every cell is clutter when fewer than two cells
};

TrainingSet prepare_training(const sim::SpaceTimeDataset& dataset, std::span<const int> cells,
                             const PipelineConfig& config);

struct CovarianceEstimate {
  std::string estimator;
  CMatrix covariance;
  std::optional<grassmann::CcmEstimate> ccm;  // bgvcf, gvcf
  std::vector<int> used_cells;
};

/// Covariance for one estimator label. "optimal" needs simulation truth.
CovarianceEstimate estimate_covariance(const std::string& label, const TrainingSet& training,
                                       const sim::SpaceTimeDataset& dataset, int cut,
                                       const PipelineConfig& config);

/// Which result tables a run produces.
struct Outputs {
  bool screening = true;
  bool convergence = true;
  bool weights = true;
  bool improvement_factor = true;
  bool beampattern = true;
  bool scnr = true;
  bool capon = true;
  bool power = true;

  static Outputs all() { return {}; }
  static Outputs screening_only() { return {true, false, false, false, false, false, false, false}; }
  static Outputs metrics_only() { return {false, false, false, true, true, true, true, true}; }
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> files;  // relative to output_dir, sorted
  std::vector<StageTiming> timings;
  std::vector<std::pair<std::string, std::string>> estimator_failures;  // label, reason
  bool partial = false;
  std::string error;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Simulates from the config or loads config.input.
sim::SpaceTimeDataset load_or_simulate(const PipelineConfig& config);

/// Runs the pipeline and writes the selected tables plus manifest.json into
/// config.output_dir. Numerical failures of individual estimators are
/// recorded in the manifest and do not stop the run; any other stage error
/// writes a partial manifest and is rethrown with the stage name.
RunManifest run_pipeline(const PipelineConfig& config, Outputs outputs = Outputs::all());

/// Output SCNR per input SCNR for each label. For each point every target is
/// rescaled so the first one has the requested power relative to the CUT's
/// mean clutter-plus-noise diagonal, targets are re-injected into the same
/// clutter realization and the estimators rerun. Points where an estimator
/// fails numerically are left out of its curve and reported in `failures`.
std::vector<stap::MetricCurve> output_scnr_curves(
    std::span<const std::string> labels, const PipelineConfig& config,
    std::span<const double> input_scnr_db,
    std::vector<std::pair<std::string, std::string>>* failures = nullptr);

}  // namespace bgvcf::pipeline
