#include "bgvcf/stap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bgvcf::stap {

namespace {

Eigen::LLT<CMatrix> factor(const CMatrix& covariance, const std::string& who) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw InputError(who + ": covariance must be square");
  }
  Eigen::LLT<CMatrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(who + ": covariance is not numerically positive definite");
  }
  return llt;
}

CVector unit_gain(const Eigen::LLT<CMatrix>& llt, const CVector& v, const std::string& who) {
  const CVector x = llt.solve(v);
  const cplx gain = v.dot(x);  // v^H R^-1 v
  if (!(gain.real() > 0.0) || !std::isfinite(gain.real()) || !x.allFinite()) {
    throw NumericalError(who + ": singular weight solve");
  }
  return x / gain;
}

}  // namespace

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::improvement_factor: return "if";
    case MetricKind::output_scnr: return "output_scnr";
    case MetricKind::beampattern_doppler: return "beampattern_doppler";
    case MetricKind::beampattern_spatial: return "beampattern_spatial";
    case MetricKind::output_power: return "output_power";
  }
  return "unknown";
}

double to_db(double power) {
  if (!(power > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(power));
}

StapWeights stap_weights(const CMatrix& covariance, const CVector& steering,
                         const std::string& estimator) {
  const std::string who = "stap_weights[" + estimator + "]";
  if (covariance.rows() != steering.size()) throw InputError(who + ": steering length mismatch");
  const auto llt = factor(covariance, who);
  StapWeights out;
  out.w = unit_gain(llt, steering, who);
  out.steering = steering;
  out.estimator = estimator;
  out.ill_conditioned = llt.rcond() < kConditionWarning;
  return out;
}

cplx apply_filter(const StapWeights& weights, const CVector& x) {
  if (weights.w.size() != x.size()) throw InputError("apply_filter: length mismatch");
  return weights.w.dot(x);  // w^H x
}

CMatrix scm(std::span<const sim::SpaceTimeSnapshot> samples) {
  if (samples.empty()) throw InputError("scm: no samples");
  const Eigen::Index dim = samples.front().data.size();
  CMatrix r = CMatrix::Zero(dim, dim);
  for (const auto& s : samples) {
    if (s.data.size() != dim) throw InputError("scm: samples differ in length");
    r.selfadjointView<Eigen::Lower>().rankUpdate(s.data);
  }
  r = r.selfadjointView<Eigen::Lower>();
  return r / static_cast<double>(samples.size());
}

double noise_floor_estimate(const CMatrix& sample_covariance, std::size_t num_samples) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(sample_covariance, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("noise_floor_estimate: eigensolver failed");
  RVector values = eig.eigenvalues().reverse();  // descending
  const auto dim = static_cast<std::size_t>(values.size());
  if (num_samples >= dim) {
    std::vector<double> v(values.data(), values.data() + values.size());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dim / 2), v.end());
    double median = v[dim / 2];
    if (dim % 2 == 0) {
      const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dim / 2));
      median = 0.5 * (median + lower);
    }
    return std::max(median, 0.0);
  }
  return std::max(values(static_cast<Eigen::Index>(num_samples) - 1), 0.0);
}

CMatrix lsmi(std::span<const sim::SpaceTimeSnapshot> samples, double loading_factor) {
  if (!(loading_factor > 0.0)) throw InputError("lsmi: loading_factor must be positive");
  CMatrix r = scm(samples);
  double floor = noise_floor_estimate(r, samples.size());
  if (!(floor > 0.0)) {
    // Degenerate data (e.g. identical samples); fall back to the mean power.
    floor = r.diagonal().real().mean() / static_cast<double>(r.rows());
  }
  r.diagonal().array() += loading_factor * floor;
  return r;
}

GipSelection gip_select(std::span<const sim::SpaceTimeSnapshot> samples,
                        const std::optional<CMatrix>& reference, double keep_fraction,
                        double loading_factor) {
  if (samples.empty()) throw InputError("gip_select: no samples");
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
    throw InputError("gip_select: keep_fraction must lie in (0, 1]");
  }
  const CMatrix r0 = reference ? *reference : lsmi(samples, loading_factor);
  const auto llt = factor(r0, "gip_select");

  GipSelection out;
  out.statistics.reserve(samples.size());
  for (const auto& s : samples) out.statistics.push_back(s.data.dot(llt.solve(s.data)).real());

  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(samples.size()) + 1e-9)));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.statistics[a] < out.statistics[b];
  });
  std::vector<bool> keep(samples.size(), false);
  for (std::size_t i = 0; i < count; ++i) keep[order[i]] = true;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) {
      out.kept.push_back(samples[i]);
      out.kept_cells.push_back(samples[i].cell_index);
    } else {
      out.dropped_cells.push_back(samples[i].cell_index);
    }
  }
  return out;
}

CMatrix euclidean_mean_ccm(std::span<const thpd::ThpdCovariance> matrices,
                           std::span<const double> weights) {
  if (matrices.empty()) throw InputError("euclidean_mean_ccm: no matrices");
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(matrices.size(), 1.0 / static_cast<double>(matrices.size()));
  if (w.size() != matrices.size()) throw InputError("euclidean_mean_ccm: weight count mismatch");
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw InputError("euclidean_mean_ccm: weights must sum to 1");

  const int dim = matrices.front().dimension();
  std::vector<cplx> mean(static_cast<std::size_t>(dim), cplx{0.0});
  for (std::size_t q = 0; q < matrices.size(); ++q) {
    if (matrices[q].dimension() != dim) throw InputError("euclidean_mean_ccm: dimension mismatch");
    for (int k = 0; k < dim; ++k) mean[static_cast<std::size_t>(k)] += w[q] * matrices[q].autocorrelation[static_cast<std::size_t>(k)];
  }
  return thpd::assemble_thpd(mean);
}

MetricCurve improvement_factor(const CMatrix& estimate, const CMatrix& truth,
                               std::span<const double> doppler_grid, double spatial,
                               SteeringGeometry geometry, const std::string& estimator) {
  const std::string who = "improvement_factor[" + estimator + "]";
  if (estimate.rows() != truth.rows()) throw InputError(who + ": dimension mismatch");
  const auto llt = factor(estimate, who);
  const double trace = truth.trace().real();

  MetricCurve curve;
  curve.kind = MetricKind::improvement_factor;
  curve.estimator = estimator;
  for (double fd : doppler_grid) {
    const CVector v = sim::steering_vector(fd, spatial, geometry.temporal_len, geometry.spatial_len);
    const CVector w = unit_gain(llt, v, who);
    const double gain = std::norm(w.dot(v));
    const double clutter = w.dot(truth * w).real();
    if (!(clutter > 0.0)) throw NumericalError(who + ": true covariance is singular");
    curve.abscissa.push_back(fd);
    curve.values.push_back(to_db(gain * trace / (clutter * v.squaredNorm())));
  }
  return curve;
}

double output_scnr_db(const StapWeights& weights, const CVector& signal, const CMatrix& truth) {
  const double s = std::norm(weights.w.dot(signal));
  const double n = weights.w.dot(truth * weights.w).real();
  if (!(n > 0.0)) throw NumericalError("output_scnr: true covariance is singular");
  return to_db(s / n);
}

MetricCurve beampattern_slice(const StapWeights& weights, std::span<const double> grid,
                              MetricKind kind, double fixed, SteeringGeometry geometry) {
  if (kind != MetricKind::beampattern_doppler && kind != MetricKind::beampattern_spatial) {
    throw InputError("beampattern_slice: kind must be a beampattern");
  }
  MetricCurve curve;
  curve.kind = kind;
  curve.estimator = weights.estimator;
  for (double f : grid) {
    const bool along_doppler = kind == MetricKind::beampattern_doppler;
    const CVector v = sim::steering_vector(along_doppler ? f : fixed, along_doppler ? fixed : f,
                                           geometry.temporal_len, geometry.spatial_len);
    curve.abscissa.push_back(f);
    curve.values.push_back(to_db(std::norm(weights.w.dot(v))));
  }
  return curve;
}

}  // namespace bgvcf::stap
