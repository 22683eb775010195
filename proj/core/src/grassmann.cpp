#include "bgvcf/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace bgvcf::grassmann {

namespace {

double orthonormal_deviation(const CMatrix& u) {
  const CMatrix gram = u.adjoint() * u;
  return (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void require_orthonormal(const CMatrix& u, const char* who) {
  if (u.cols() == 0 || orthonormal_deviation(u) > kOrthonormalTol) {
    throw InputError(std::string(who) + ": basis is not orthonormal");
  }
}

// Eigenvalues of the Hermitian s x s matrix G = I - C^H C, clamped at 0.
Eigen::SelfAdjointEigenSolver<CMatrix> gram_complement(const CMatrix& c) {
  CMatrix g = CMatrix::Identity(c.cols(), c.cols()) - c.adjoint() * c;
  g = 0.5 * (g + g.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(g);
}

double sqrt_det(const RVector& eigenvalues) {
  double det = 1.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) det *= std::max(0.0, eigenvalues(i));
  return std::sqrt(det);
}

// Replaces a degenerate block of eigenvectors with the orthonormalized
// projections of the canonical axes.
void canonicalize_cluster(CMatrix& vectors, Eigen::Index begin, Eigen::Index size) {
  const CMatrix q = vectors.middleCols(begin, size);
  const Eigen::Index dim = vectors.rows();
  CMatrix basis(dim, size);
  Eigen::Index found = 0;
  for (Eigen::Index axis = 0; axis < dim && found < size; ++axis) {
    CVector v = q * q.row(axis).adjoint();  // P e_axis
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < found; ++k) v -= basis.col(k) * basis.col(k).dot(v);
    }
    const double norm = v.norm();
    if (norm > 1e-8) basis.col(found++) = v / norm;
  }
  if (found == size) vectors.middleCols(begin, size) = basis;
}

void fix_phase(CMatrix& vectors, Eigen::Index cols) {
  for (Eigen::Index j = 0; j < cols; ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = i;
      }
    }
    if (best_abs > 0.0) vectors.col(j) *= std::conj(vectors(best, j)) / best_abs;
  }
}

}  // namespace

GrassmannPoint extract_subspace(const CMatrix& covariance, int s, int cell_index) {
  const Eigen::Index dim = covariance.rows();
  if (dim == 0 || covariance.cols() != dim) throw InputError("extract_subspace: matrix not square");
  if (s < 1 || s > dim) {
    throw InputError("extract_subspace: subspace dimension " + std::to_string(s) +
                     " outside [1, " + std::to_string(dim) + "]");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("extract_subspace: eigensolver failed");

  // Descending order.
  const RVector values = eig.eigenvalues().reverse();
  CMatrix vectors = eig.eigenvectors().rowwise().reverse();

  const double scale = std::max(std::abs(values(0)), std::numeric_limits<double>::min());
  const double tie = 1e-10 * scale;
  for (Eigen::Index begin = 0; begin < s;) {
    Eigen::Index end = begin + 1;
    while (end < dim && std::abs(values(end - 1) - values(end)) <= tie) ++end;
    if (end - begin > 1) canonicalize_cluster(vectors, begin, end - begin);
    begin = end;
  }
  fix_phase(vectors, s);

  if (!(values(s - 1) > 0.0) || !values.allFinite()) {
    throw NumericalError("extract_subspace: matrix is not positive definite on the top-" +
                         std::to_string(s) + " subspace");
  }
  GrassmannPoint p;
  p.basis = vectors.leftCols(s);
  p.eigenvalues = values.head(s);
  p.discarded_mean = s < dim ? values.tail(dim - s).mean() : 0.0;
  p.cell_index = cell_index;
  return p;
}

GrassmannPoint extract_subspace(const thpd::ThpdCovariance& covariance, int s) {
  return extract_subspace(covariance.dense(), s, covariance.cell_index);
}

double volume(const CMatrix& s, int d) {
  if (d < 0) throw InputError("volume: negative dimension");
  if (d == 0) return 1.0;
  if (d > std::min(s.rows(), s.cols())) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(s);
  const RVector& sv = svd.singularValues();
  double out = 1.0;
  for (int i = 0; i < d; ++i) out *= sv(i);
  return out;
}

RVector principal_angles(const CMatrix& u1, const CMatrix& u2) {
  if (u1.rows() != u2.rows()) throw InputError("principal_angles: row dimensions differ");
  require_orthonormal(u1, "principal_angles");
  require_orthonormal(u2, "principal_angles");
  Eigen::JacobiSVD<CMatrix> svd(u1.adjoint() * u2);
  const RVector& cosines = svd.singularValues();  // descending
  RVector angles(cosines.size());
  for (Eigen::Index i = 0; i < cosines.size(); ++i) {
    angles(i) = std::acos(std::clamp(cosines(i), 0.0, 1.0));
  }
  return angles;  // ascending because cosines are descending
}

double vcf_raw(const CMatrix& uq, const CMatrix& u) {
  const auto eig = gram_complement(uq.adjoint() * u);
  return sqrt_det(eig.eigenvalues());
}

double vcf(const CMatrix& u1, const CMatrix& u2) {
  if (u1.rows() != u2.rows()) throw InputError("vcf: row dimensions differ");
  if (u1.cols() != u2.cols()) throw InputError("vcf: subspace dimensions differ");
  require_orthonormal(u1, "vcf");
  require_orthonormal(u2, "vcf");
  return std::clamp(vcf_raw(u1, u2), 0.0, 1.0);
}

CMatrix vcf_gradient(const CMatrix& uq, const CMatrix& u) {
  if (uq.rows() != u.rows()) throw InputError("vcf_gradient: row dimensions differ");
  const CMatrix c = uq.adjoint() * u;  // Uq^H U
  const auto eig = gram_complement(c);
  const RVector& g = eig.eigenvalues();
  const double f = sqrt_det(g);
  const double shift = f < kSingularEps ? kSingularEps : 0.0;
  RVector inv(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double gi = std::max(g(i), 0.0) + shift;
    inv(i) = gi > 0.0 ? 1.0 / gi : 0.0;
  }
  const CMatrix g_inv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
  return -f * (uq * (c * g_inv));
}

CMatrix qr_retract(const CMatrix& y) {
  Eigen::HouseholderQR<CMatrix> qr(y);
  CMatrix q = qr.householderQ() * CMatrix::Identity(y.rows(), y.cols());
  const CMatrix& packed = qr.matrixQR();
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const cplx d = packed(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

int brennan_rank(int num_elements, int num_pulses, double beta) {
  const double r = std::round(num_elements + (num_pulses - 1) * beta);
  const int total = num_elements * num_pulses;
  return std::clamp(static_cast<int>(r), 1, total);
}

void OptimizerConfig::validate(std::size_t num_points) const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InputError("optimizer: step_size must be > 0");
  if (max_iterations < 0) throw InputError("optimizer: max_iterations must be >= 0");
  if (!(tolerance >= 0.0)) throw InputError("optimizer: tolerance must be >= 0");
  if (subspace_dim < 0) throw InputError("optimizer: subspace_dim must be >= 1 (or 0 for auto)");
  if (max_halvings < 0) throw InputError("optimizer: max_halvings must be >= 0");
  if (!weights.empty()) {
    if (weights.size() != num_points) throw InputError("optimizer: one weight per point required");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw InputError("optimizer: weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InputError("optimizer: weights must sum to 1");
  }
}

double weighted_objective(std::span<const GrassmannPoint> points, std::span<const double> weights,
                          const CMatrix& u) {
  double total = 0.0;
  for (std::size_t q = 0; q < points.size(); ++q) total += weights[q] * vcf_raw(points[q].basis, u);
  return total;
}

CcmEstimate estimate_ccm(std::span<const GrassmannPoint> points, const OptimizerConfig& config) {
  if (points.empty()) throw InputError("estimate_ccm: no clutter points");
  config.validate(points.size());
  const Eigen::Index dim = points.front().basis.rows();
  const Eigen::Index s = points.front().basis.cols();
  if (config.subspace_dim > 0 && config.subspace_dim != s) {
    throw InputError("estimate_ccm: points do not have the configured subspace dimension");
  }
  for (const auto& p : points) {
    if (p.basis.rows() != dim || p.basis.cols() != s || p.eigenvalues.size() != s) {
      throw InputError("estimate_ccm: points have non-conforming dimensions");
    }
  }
  std::vector<double> weights = config.weights;
  if (weights.empty()) weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));

  CcmEstimate out;
  // Medoid start.
  double objective = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double value = weighted_objective(points, weights, points[i].basis);
    if (value < objective) {
      objective = value;
      out.initial_index = static_cast<int>(i);
    }
  }
  CMatrix u = points[static_cast<std::size_t>(out.initial_index)].basis;
  out.objective_trace.push_back(objective);

  for (int it = 0; it < config.max_iterations; ++it) {
    CMatrix grad = CMatrix::Zero(dim, s);
    for (std::size_t q = 0; q < points.size(); ++q) {
      grad += weights[q] * vcf_gradient(points[q].basis, u);
    }
    const CMatrix direction = grad - u * (u.adjoint() * grad);
    if (!(direction.norm() > 0.0)) {
      out.converged = true;
      break;
    }
    double step = config.step_size;
    bool accepted = false;
    CMatrix candidate;
    double candidate_objective = objective;
    for (int h = 0; h <= config.max_halvings; ++h, step *= 0.5) {
      candidate = qr_retract(u - step * direction);
      candidate_objective = weighted_objective(points, weights, candidate);
      if (candidate_objective <= objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;  // no descent at the smallest trial step
      break;
    }
    const double change = (objective - candidate_objective) / std::max(objective, 1e-300);
    u = std::move(candidate);
    objective = candidate_objective;
    out.objective_trace.push_back(objective);
    out.iterations = it + 1;
    if (change < config.tolerance) {
      out.converged = true;
      break;
    }
  }

  RVector lambda = RVector::Zero(s);
  double floor = 0.0;
  for (std::size_t q = 0; q < points.size(); ++q) {
    lambda += weights[q] * points[q].eigenvalues;
    floor += weights[q] * points[q].discarded_mean;
  }
  CMatrix r = u * lambda.asDiagonal() * u.adjoint();
  r.diagonal().array() += floor;
  out.covariance = 0.5 * (r + r.adjoint());
  out.basis.basis = std::move(u);
  out.basis.eigenvalues = std::move(lambda);
  out.basis.discarded_mean = floor;
  out.noise_floor = floor;
  return out;
}

}  // namespace bgvcf::grassmann
