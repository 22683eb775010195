#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "bgvcf/types.hpp"

namespace bgvcf::sim {

// Rounded value; keeps the half-wavelength spacing at exactly 0.1 m for 1.5 GHz.
inline constexpr double kSpeedOfLight = 3.0e8;

/// Side-looking ULA scenario. Defaults reproduce the simulation table of the
/// reference experiment (10 elements, 12 pulses, 201 patches, CNR 50 dB).
///
/// Snapshot layout: the space-time vector is v_d(f_d) (x) v_s(f_s), i.e.
/// pulse-major with `num_elements` consecutive spatial samples per pulse.
struct ScenarioConfig {
  int num_elements = 10;
  int num_pulses = 12;
  double carrier_frequency = 1.5e9;  // Hz
  double prf = 3000.0;               // Hz
  double platform_velocity = 150.0;  // m/s
  double platform_height = 10.0e3;   // m
  double bandwidth = 10.0e6;         // Hz, sets range-cell size only
  std::optional<double> element_spacing;  // m, half wavelength when unset
  int num_clutter_patches = 201;
  int num_range_ambiguities = 1;
  double cnr_db = 50.0;
  double noise_variance = 1.0;
  int num_range_cells = 100;
  /// Standard deviation (dB) of the per-cell log-normal clutter power
  /// texture; 0 gives homogeneous clutter.
  double texture_db = 3.0;
  std::uint64_t rng_seed = 0;

  [[nodiscard]] double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  [[nodiscard]] double spacing() const { return element_spacing.value_or(0.5 * wavelength()); }
  /// Clutter ridge slope 2 v / (d prf).
  [[nodiscard]] double beta() const { return 2.0 * platform_velocity / (spacing() * prf); }
  [[nodiscard]] int temporal_len() const { return num_pulses; }
  [[nodiscard]] int spatial_len() const { return num_elements; }
  [[nodiscard]] int dimension() const { return num_pulses * num_elements; }

  /// Throws InputError on any violated invariant.
  void validate() const;
};

struct TargetSpec {
  std::vector<int> range_cells;
  double normalized_doppler = 0.0;
  double normalized_spatial = 0.0;
  cplx amplitude{0.0, 0.0};

  /// Real amplitude sqrt(noise_variance * 10^(snr_db/10)).
  static TargetSpec from_snr(std::vector<int> cells, double doppler, double spatial,
                             double snr_db, double noise_variance);
  void validate() const;
};

struct SpaceTimeSnapshot {
  int cell_index = 0;
  CVector data;
};

struct SpaceTimeDataset {
  ScenarioConfig config;
  std::vector<SpaceTimeSnapshot> snapshots;
  std::vector<TargetSpec> targets;
  /// Per-cell clutter power scale (mean one over the texture distribution).
  std::vector<double> textures;
  /// Unit-texture clutter-plus-noise covariance; absent for loaded data.
  std::optional<CMatrix> ideal_clutter_covariance;

  /// Ideal clutter-plus-noise covariance of one cell, texture applied.
  [[nodiscard]] CMatrix cell_covariance(int cell) const;
  [[nodiscard]] const SpaceTimeSnapshot& at(int cell) const;
};

/// v_d(f_d) (x) v_s(f_s) with v_d of length `temporal_len` and v_s of length
/// `spatial_len`; entry (m, n) sits at index m * spatial_len + n.
CVector steering_vector(double doppler, double spatial, int temporal_len, int spatial_len);

/// Normalized spatial frequencies of the azimuth patches: midpoints of Nc
/// equal bins of sin(azimuth) over (-1, 1], scaled by d / lambda.
std::vector<double> patch_spatial_frequencies(const ScenarioConfig& config);

/// Sum over patches and ambiguities of E|a|^2 v v^H plus noise_variance * I.
CMatrix clutter_covariance(const ScenarioConfig& config);

struct ClutterRealization {
  std::vector<SpaceTimeSnapshot> snapshots;  // clutter plus thermal noise
  std::vector<double> textures;
  CMatrix ideal_covariance;
};

/// Draws every range cell from its own engine seeded by (rng_seed, cell), so
/// cells are independent of generation order.
ClutterRealization generate_clutter(const ScenarioConfig& config);

/// Adds a_t v(f_d, f_s) to every listed cell. Returns the modified dataset.
SpaceTimeDataset inject_targets(SpaceTimeDataset dataset, std::span<const TargetSpec> targets);

/// generate_clutter followed by inject_targets.
SpaceTimeDataset simulate(const ScenarioConfig& config, std::span<const TargetSpec> targets);

/// P(f_d, f_s) = 1 / (v^H R^-1 v). Rows follow the Doppler grid, columns the
/// spatial grid.
Eigen::MatrixXd capon_spectrum(const CMatrix& covariance, std::span<const double> doppler_grid,
                               std::span<const double> spatial_grid, int temporal_len,
                               int spatial_len);

/// n points evenly spaced over [lo, hi].
std::vector<double> linear_grid(int n, double lo = -0.5, double hi = 0.5);

/// Engine used for cell `cell`; exposed so tests can reproduce draws.
std::mt19937_64 cell_engine(std::uint64_t seed, std::uint64_t cell);

}  // namespace bgvcf::sim
