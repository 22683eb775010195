#pragma once

#include <span>
#include <vector>

#include "bgvcf/sim.hpp"
#include "bgvcf/types.hpp"

namespace bgvcf::thpd {

/// Reflection coefficients are kept strictly inside the unit disc so every
/// reconstructed Toeplitz matrix stays positive definite.
inline constexpr double kMaxReflection = 1.0 - 1e-6;

struct ReflectionSpectrum {
  double p0 = 0.0;
  std::vector<cplx> mu;                   // mu_1 .. mu_order
  std::vector<double> prediction_powers;  // P_0 .. P_order
  double psi1 = 0.0;
  int clamped = 0;  // coefficients pulled back to kMaxReflection
};

struct BurgOptions {
  double psi1 = 0.01;
  int order = -1;  // -1: full order, length - 1
};

/// Regularized Burg recursion on one snapshot.
///
/// The reflection coefficient at stage n is
///
///   mu_n = -(2/(K-n) sum f_{n-1}(k) conj(b_{n-1}(k-1)) + 2 sum_{k=1}^{n-1} nu_k a_k a_{n-k})
///          / (1/(K-n) sum |f_{n-1}(k)|^2 + |b_{n-1}(k-1)|^2 + 2 sum_{k=0}^{n-1} nu_k |a_k|^2)
///
/// with nu_k = psi1 (2 pi)^2 (k - n)^2 and a_k the stage n-1 prediction
/// coefficients. The regularization sums use the index ranges exactly as
/// written above (numerator from 1, denominator from 0). psi1 = 0 reduces to
/// the classical Burg estimator.
///
/// Throws NumericalError for an all-zero snapshot.
ReflectionSpectrum burg_reflection(std::span<const cplx> x, double psi1, int order);

/// Autocorrelation r_0 .. r_{dimension-1} from (P0, mu) by the inverse
/// Levinson recursion
///
///   r_n = -mu_n P_{n-1} - sum_{k=1}^{n-1} a_k^{(n-1)} r_{n-k}.
///
/// Coefficients beyond spec.mu.size() are taken as zero.
std::vector<cplx> reconstruct_autocorrelation(const ReflectionSpectrum& spec, int dimension);

/// Toeplitz Hermitian matrix R[i][j] = r_{i-j} with r_{-k} = conj(r_k).
CMatrix assemble_thpd(std::span<const cplx> autocorrelation);

/// THPD covariance stored by its first column.
struct ThpdCovariance {
  std::vector<cplx> autocorrelation;
  int cell_index = -1;
  int clamped = 0;

  [[nodiscard]] int dimension() const { return static_cast<int>(autocorrelation.size()); }
  [[nodiscard]] double power() const { return autocorrelation.front().real(); }
  [[nodiscard]] CMatrix dense() const { return assemble_thpd(autocorrelation); }
};

/// Burg + reconstruction for one range cell.
ThpdCovariance thpd_covariance(const sim::SpaceTimeSnapshot& snapshot, const BurgOptions& options);

std::vector<ThpdCovariance> thpd_covariances(std::span<const sim::SpaceTimeSnapshot> snapshots,
                                             const BurgOptions& options);

}  // namespace bgvcf::thpd
