#include "bgvcf/sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace bgvcf::sim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("scenario: " + what);
}

cplx unit_phasor(double cycles) {
  const double phase = 2.0 * std::numbers::pi * cycles;
  return {std::cos(phase), std::sin(phase)};
}

cplx complex_normal(std::mt19937_64& engine, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  const double re = normal(engine);
  const double im = normal(engine);
  return {re, im};
}

// Steering vectors of every (ambiguity, patch) pair, one per column.
CMatrix patch_steering_matrix(const ScenarioConfig& config) {
  const auto spatial = patch_spatial_frequencies(config);
  const int patches = config.num_clutter_patches;
  CMatrix steering(config.dimension(), patches * config.num_range_ambiguities);
  for (int j = 0; j < config.num_range_ambiguities; ++j) {
    for (int i = 0; i < patches; ++i) {
      steering.col(j * patches + i) =
          steering_vector(config.beta() * spatial[i], spatial[i], config.temporal_len(),
                          config.spatial_len());
    }
  }
  return steering;
}

double patch_power(const ScenarioConfig& config) {
  const double cnr = std::pow(10.0, config.cnr_db / 10.0);
  return cnr * config.noise_variance /
         (static_cast<double>(config.num_clutter_patches) * config.num_range_ambiguities);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(num_elements >= 2, "num_elements must be >= 2");
  require(num_pulses >= 2, "num_pulses must be >= 2");
  require(carrier_frequency > 0.0, "carrier_frequency must be positive");
  require(prf > 0.0, "prf must be positive");
  require(std::isfinite(platform_velocity), "platform_velocity must be finite");
  require(num_clutter_patches >= 1, "num_clutter_patches must be >= 1");
  require(num_range_ambiguities >= 1, "num_range_ambiguities must be >= 1");
  require(std::isfinite(cnr_db), "cnr_db must be finite");
  require(noise_variance > 0.0 && std::isfinite(noise_variance),
          "noise_variance must be positive");
  require(num_range_cells >= 1, "num_range_cells must be >= 1");
  require(spacing() > 0.0 && std::isfinite(spacing()), "element_spacing must be positive");
  require(texture_db >= 0.0 && std::isfinite(texture_db), "texture_db must be >= 0");
}

TargetSpec TargetSpec::from_snr(std::vector<int> cells, double doppler, double spatial,
                                double snr_db, double noise_variance) {
  TargetSpec t;
  t.range_cells = std::move(cells);
  t.normalized_doppler = doppler;
  t.normalized_spatial = spatial;
  t.amplitude = std::sqrt(noise_variance * std::pow(10.0, snr_db / 10.0));
  return t;
}

void TargetSpec::validate() const {
  if (range_cells.empty()) throw InputError("target: range_cells is empty");
  if (!std::isfinite(normalized_doppler) || std::abs(normalized_doppler) > 0.5) {
    throw InputError("target: |normalized_doppler| must be <= 0.5");
  }
  if (!std::isfinite(normalized_spatial)) throw InputError("target: non-finite spatial frequency");
  if (!std::isfinite(amplitude.real()) || !std::isfinite(amplitude.imag())) {
    throw InputError("target: non-finite amplitude");
  }
}

CMatrix SpaceTimeDataset::cell_covariance(int cell) const {
  if (!ideal_clutter_covariance) {
    throw InputError("dataset carries no ideal covariance (loaded data?)");
  }
  if (cell < 0 || cell >= static_cast<int>(textures.size())) {
    throw InputError("cell " + std::to_string(cell) + " outside dataset");
  }
  const double noise = config.noise_variance;
  CMatrix r = *ideal_clutter_covariance;
  r.diagonal().array() -= noise;
  r *= textures[cell];
  r.diagonal().array() += noise;
  return r;
}

const SpaceTimeSnapshot& SpaceTimeDataset::at(int cell) const {
  if (cell < 0 || cell >= static_cast<int>(snapshots.size())) {
    throw InputError("cell " + std::to_string(cell) + " outside dataset of " +
                     std::to_string(snapshots.size()) + " cells");
  }
  return snapshots[cell];
}

CVector steering_vector(double doppler, double spatial, int temporal_len, int spatial_len) {
  if (!std::isfinite(doppler) || !std::isfinite(spatial)) {
    throw InputError("steering_vector: non-finite frequency");
  }
  if (temporal_len < 1 || spatial_len < 1) throw InputError("steering_vector: empty dimension");
  CVector v(static_cast<Eigen::Index>(temporal_len) * spatial_len);
  for (int m = 0; m < temporal_len; ++m) {
    for (int n = 0; n < spatial_len; ++n) {
      v(m * spatial_len + n) = unit_phasor(doppler * m + spatial * n);
    }
  }
  return v;
}

std::vector<double> patch_spatial_frequencies(const ScenarioConfig& config) {
  const int nc = config.num_clutter_patches;
  const double scale = config.spacing() / config.wavelength();
  std::vector<double> out(nc);
  for (int i = 0; i < nc; ++i) {
    const double sine = -1.0 + (2.0 * i + 1.0) / nc;
    out[i] = scale * sine;
  }
  return out;
}

CMatrix clutter_covariance(const ScenarioConfig& config) {
  config.validate();
  const CMatrix steering = patch_steering_matrix(config);
  CMatrix r = patch_power(config) * (steering * steering.adjoint());
  r.diagonal().array() += config.noise_variance;
  // Exact Hermitian symmetry regardless of summation order.
  return 0.5 * (r + r.adjoint());
}

std::mt19937_64 cell_engine(std::uint64_t seed, std::uint64_t cell) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(cell >> 32)};
  return std::mt19937_64(seq);
}

ClutterRealization generate_clutter(const ScenarioConfig& config) {
  config.validate();
  const CMatrix steering = patch_steering_matrix(config);
  const double power = patch_power(config);
  const int dim = config.dimension();
  // Log-normal texture normalized to unit mean.
  const double sigma_ln = config.texture_db * std::log(10.0) / 10.0;

  ClutterRealization out;
  out.snapshots.reserve(config.num_range_cells);
  out.textures.reserve(config.num_range_cells);
  for (int cell = 0; cell < config.num_range_cells; ++cell) {
    auto engine = cell_engine(config.rng_seed, static_cast<std::uint64_t>(cell));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double texture = std::exp(sigma_ln * gauss(engine) - 0.5 * sigma_ln * sigma_ln);

    CVector amplitudes(steering.cols());
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k) {
      amplitudes(k) = complex_normal(engine, power);
    }
    CVector x = std::sqrt(texture) * (steering * amplitudes);
    for (int k = 0; k < dim; ++k) x(k) += complex_normal(engine, config.noise_variance);

    out.snapshots.push_back({cell, std::move(x)});
    out.textures.push_back(texture);
  }
  out.ideal_covariance = clutter_covariance(config);
  return out;
}

SpaceTimeDataset inject_targets(SpaceTimeDataset dataset, std::span<const TargetSpec> targets) {
  const int cells = static_cast<int>(dataset.snapshots.size());
  for (const auto& target : targets) {
    target.validate();
    for (int cell : target.range_cells) {
      if (cell < 0 || cell >= cells) {
        throw InputError("target cell " + std::to_string(cell) + " outside dataset of " +
                         std::to_string(cells) + " cells");
      }
    }
  }
  for (const auto& target : targets) {
    const CVector v = target.amplitude *
                      steering_vector(target.normalized_doppler, target.normalized_spatial,
                                      dataset.config.temporal_len(), dataset.config.spatial_len());
    for (int cell : target.range_cells) dataset.snapshots[cell].data += v;
    dataset.targets.push_back(target);
  }
  return dataset;
}

SpaceTimeDataset simulate(const ScenarioConfig& config, std::span<const TargetSpec> targets) {
  auto clutter = generate_clutter(config);
  SpaceTimeDataset dataset;
  dataset.config = config;
  dataset.snapshots = std::move(clutter.snapshots);
  dataset.textures = std::move(clutter.textures);
  dataset.ideal_clutter_covariance = std::move(clutter.ideal_covariance);
  return inject_targets(std::move(dataset), targets);
}

Eigen::MatrixXd capon_spectrum(const CMatrix& covariance, std::span<const double> doppler_grid,
                               std::span<const double> spatial_grid, int temporal_len,
                               int spatial_len) {
  if (covariance.rows() != covariance.cols() ||
      covariance.rows() != static_cast<Eigen::Index>(temporal_len) * spatial_len) {
    throw InputError("capon_spectrum: covariance does not match the space-time dimension");
  }
  Eigen::LLT<CMatrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("capon_spectrum: covariance is not positive definite");
  }
  Eigen::MatrixXd spectrum(doppler_grid.size(), spatial_grid.size());
  for (std::size_t i = 0; i < doppler_grid.size(); ++i) {
    for (std::size_t j = 0; j < spatial_grid.size(); ++j) {
      const CVector v = steering_vector(doppler_grid[i], spatial_grid[j], temporal_len, spatial_len);
      // v^H R^-1 v = |L^-1 v|^2
      const CVector y = llt.matrixL().solve(v);
      const double q = y.squaredNorm();
      if (!(q > 0.0) || !std::isfinite(q)) {
        throw NumericalError("capon_spectrum: singular quadratic form");
      }
      spectrum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0 / q;
    }
  }
  return spectrum;
}

std::vector<double> linear_grid(int n, double lo, double hi) {
  if (n < 1) throw InputError("linear_grid: need at least one point");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = 0.5 * (lo + hi);
    return g;
  }
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace bgvcf::sim
