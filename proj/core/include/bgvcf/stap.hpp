#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgvcf/sim.hpp"
#include "bgvcf/thpd.hpp"
#include "bgvcf/types.hpp"

namespace bgvcf::stap {

/// Output SCNR floor for a zero signal.
inline constexpr double kDbFloor = -300.0;
/// Reciprocal condition number below which a weight solve is flagged.
inline constexpr double kConditionWarning = 1e-12;

struct StapWeights {
  CVector w;
  CVector steering;
  std::string estimator;
  bool ill_conditioned = false;
};

/// w = R^-1 v / (v^H R^-1 v), solved through a Cholesky factorization.
/// Throws NumericalError naming `estimator` if R is not numerically positive
/// definite.
StapWeights stap_weights(const CMatrix& covariance, const CVector& steering,
                         const std::string& estimator = "unnamed");

/// y = w^H x.
cplx apply_filter(const StapWeights& weights, const CVector& x);

/// (1/L) sum x x^H.
CMatrix scm(std::span<const sim::SpaceTimeSnapshot> samples);

/// Noise-floor estimate used for loading: the median eigenvalue of the SCM
/// when there are at least as many samples as dimensions, otherwise its
/// smallest structurally nonzero eigenvalue (the L-th largest).
double noise_floor_estimate(const CMatrix& sample_covariance, std::size_t num_samples);

/// SCM + loading_factor * noise_floor_estimate * I.
CMatrix lsmi(std::span<const sim::SpaceTimeSnapshot> samples, double loading_factor = 10.0);

struct GipSelection {
  std::vector<sim::SpaceTimeSnapshot> kept;  // original order
  std::vector<int> kept_cells;
  std::vector<int> dropped_cells;
  std::vector<double> statistics;  // x^H R0^-1 x per input sample
};

/// Keeps the floor(keep_fraction * L) samples (at least one) with the
/// smallest generalized inner product x^H R0^-1 x. R0 defaults to the LSMI
/// matrix of all samples.
GipSelection gip_select(std::span<const sim::SpaceTimeSnapshot> samples,
                        const std::optional<CMatrix>& reference = std::nullopt,
                        double keep_fraction = 0.8, double loading_factor = 10.0);

/// sum_q w_q R_q, the minimizer of sum_q w_q ||R_q - R||_F^2.
CMatrix euclidean_mean_ccm(std::span<const thpd::ThpdCovariance> matrices,
                           std::span<const double> weights = {});

enum class MetricKind { improvement_factor, output_scnr, beampattern_doppler, beampattern_spatial, output_power };

const char* to_string(MetricKind kind);

struct MetricCurve {
  std::vector<double> abscissa;
  std::vector<double> values;  // dB
  std::string estimator;
  MetricKind kind = MetricKind::improvement_factor;
};

struct SteeringGeometry {
  int temporal_len = 0;
  int spatial_len = 0;
};

/// IF(f_d) = |w^H v|^2 tr(R) / ((w^H R w)(v^H v)) in dB, with w recomputed
/// from `estimate` at every Doppler bin and the spatial frequency held at
/// `spatial`. R is the true clutter-plus-noise covariance.
MetricCurve improvement_factor(const CMatrix& estimate, const CMatrix& truth,
                               std::span<const double> doppler_grid, double spatial,
                               SteeringGeometry geometry, const std::string& estimator);

/// |w^H s|^2 / (w^H R w) in dB, floored at kDbFloor.
double output_scnr_db(const StapWeights& weights, const CVector& signal, const CMatrix& truth);

/// |w^H v(f_d, f_s)|^2 in dB along a fixed-Doppler (beampattern_spatial) or
/// fixed-spatial (beampattern_doppler) slice through `fixed`.
MetricCurve beampattern_slice(const StapWeights& weights, std::span<const double> grid,
                              MetricKind kind, double fixed, SteeringGeometry geometry);

double to_db(double power);

}  // namespace bgvcf::stap
