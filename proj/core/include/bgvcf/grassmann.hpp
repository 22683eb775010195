#pragma once

#include <span>
#include <vector>

#include "bgvcf/thpd.hpp"
#include "bgvcf/types.hpp"

namespace bgvcf::grassmann {

/// Orthonormality tolerance on max |U^H U - I| for checked entry points.
inline constexpr double kOrthonormalTol = 1e-8;
/// Tikhonov term for G^-1 once the VCF is numerically zero.
inline constexpr double kSingularEps = 1e-12;

/// A point of Gr(s, K): an orthonormal basis of the dominant eigenspace of a
/// covariance together with its eigenvalues.
struct GrassmannPoint {
  CMatrix basis;          // K x s, orthonormal columns
  RVector eigenvalues;    // s values, descending, positive
  double discarded_mean = 0.0;  // mean of the K - s trailing eigenvalues
  int cell_index = -1;

  [[nodiscard]] int ambient_dim() const { return static_cast<int>(basis.rows()); }
  [[nodiscard]] int subspace_dim() const { return static_cast<int>(basis.cols()); }
};

/// Top-s eigenpairs of a Hermitian positive definite matrix.
///
/// Output is deterministic: eigenvectors inside a degenerate eigenvalue
/// cluster are replaced by the Gram-Schmidt basis built from the cluster
/// projections of e_1, e_2, ..., and every column is rotated so its
/// largest-magnitude entry is real positive.
GrassmannPoint extract_subspace(const CMatrix& covariance, int s, int cell_index = -1);
GrassmannPoint extract_subspace(const thpd::ThpdCovariance& covariance, int s);

/// Product of the d largest singular values; 0 when S has fewer than d.
double volume(const CMatrix& s, int d);

/// Principal angles in [0, pi/2], ascending.
RVector principal_angles(const CMatrix& u1, const CMatrix& u2);

/// sqrt(det(I - C C^H)) with C = U1^H U2; equals the product of the sines of
/// the principal angles. Requires orthonormal bases with equal column count.
double vcf(const CMatrix& u1, const CMatrix& u2);

/// f(U) = sqrt(det(I - U^H Uq Uq^H U)) for any U, without validation. This is
/// the function vcf_gradient differentiates.
double vcf_raw(const CMatrix& uq, const CMatrix& u);

/// Euclidean gradient of vcf_raw(uq, .) at u:  -f Uq Uq^H U G^-1, with
/// G + kSingularEps I in place of G once f < kSingularEps.
CMatrix vcf_gradient(const CMatrix& uq, const CMatrix& u);

/// Thin-QR retraction with a positive real diagonal in R.
CMatrix qr_retract(const CMatrix& y);

/// Brennan clutter rank round(elements + (pulses - 1) beta), clipped to
/// [1, pulses * elements].
int brennan_rank(int num_elements, int num_pulses, double beta);

struct OptimizerConfig {
  double step_size = 0.1;
  int max_iterations = 200;
  double tolerance = 1e-9;      // relative objective change
  std::vector<double> weights;  // empty: uniform
  int subspace_dim = 0;         // 0: taken from the points
  int max_halvings = 20;

  void validate(std::size_t num_points) const;
};

struct CcmEstimate {
  CMatrix covariance;
  GrassmannPoint basis;  // eigenvalues hold the recomposed Lambda
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
  int initial_index = 0;  // medoid the descent started from
  double noise_floor = 0.0;
};

/// sum_q w_q vcf_raw(U_q, U).
double weighted_objective(std::span<const GrassmannPoint> points, std::span<const double> weights,
                          const CMatrix& u);

/// Minimizes sum_q w_q VCF(U_q, U) over Gr(s, K) by projected gradient
/// descent with step halving and QR retraction, starting from the medoid of
/// the inputs, then recomposes
///
///   R = U diag(sum_q w_q Lambda_q) U^H + (sum_q w_q discarded_mean_q) I.
CcmEstimate estimate_ccm(std::span<const GrassmannPoint> points, const OptimizerConfig& config);

}  // namespace bgvcf::grassmann
