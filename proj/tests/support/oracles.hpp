#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numerical code.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline cplx cgauss(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  return {re, n(rng)};
}

inline CMatrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cgauss(rng);
  return m;
}

/// Haar-ish orthonormal K x s basis from a Gaussian QR.
inline CMatrix orthonormal(Eigen::Index k, Eigen::Index s, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian(k, s, rng));
  return qr.householderQ() * CMatrix::Identity(k, s);
}

inline CMatrix unitary(Eigen::Index s, std::mt19937_64& rng) { return orthonormal(s, s, rng); }

/// Classical Levinson-Durbin on r_0..r_{K-1}, predictor convention
/// e(k) = x(k) + sum a_i x(k-i). Returns mu_1..mu_{K-1}.
inline std::vector<cplx> levinson_durbin(const std::vector<cplx>& r, double& p0) {
  p0 = r[0].real();
  double p = p0;
  std::vector<cplx> a{1.0};
  std::vector<cplx> mu;
  for (std::size_t n = 1; n < r.size(); ++n) {
    cplx acc = r[n];
    for (std::size_t k = 1; k < n; ++k) acc += a[k] * r[n - k];
    const cplx m = -acc / p;
    mu.push_back(m);
    std::vector<cplx> next(n + 1);
    next[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) next[k] = a[k] + m * std::conj(a[n - k]);
    next[n] = m;
    a = next;
    p *= 1.0 - std::norm(m);
  }
  return mu;
}

/// Direct-form Burg: prediction errors are re-evaluated by convolution with
/// the current AR polynomial at every order instead of being updated in
/// place. Regularization terms are written out from their definition.
inline std::vector<cplx> burg_direct(const std::vector<cplx>& x, double psi1, double& p0) {
  const int len = static_cast<int>(x.size());
  p0 = 0.0;
  for (const auto& v : x) p0 += std::norm(v);
  p0 /= len;
  std::vector<cplx> a{1.0};
  std::vector<cplx> mu;
  const double w = psi1 * 4.0 * std::numbers::pi * std::numbers::pi;
  for (int n = 1; n < len; ++n) {
    // forward error of order n-1 at k, backward error of order n-1 at k-1
    auto fwd = [&](int k) {
      cplx s = 0.0;
      for (int i = 0; i <= n - 1; ++i) s += a[i] * x[k - i];
      return s;
    };
    auto bwd = [&](int k) {
      cplx s = 0.0;
      for (int i = 0; i <= n - 1; ++i) s += std::conj(a[i]) * x[k - (n - 1) + i];
      return s;
    };
    cplx num = 0.0;
    double den = 0.0;
    for (int k = n; k < len; ++k) {
      const cplx f = fwd(k);
      const cplx b = bwd(k - 1);
      num += f * std::conj(b);
      den += std::norm(f) + std::norm(b);
    }
    num *= 2.0 / (len - n);
    den /= (len - n);
    for (int k = 1; k <= n - 1; ++k) num += 2.0 * w * (k - n) * (k - n) * a[k] * a[n - k];
    for (int k = 0; k <= n - 1; ++k) den += 2.0 * w * (k - n) * (k - n) * std::norm(a[k]);
    cplx m = -num / den;
    if (std::abs(m) >= 1.0 - 1e-6) m *= (1.0 - 1e-6) / std::abs(m);
    mu.push_back(m);
    std::vector<cplx> next(n + 1);
    next[0] = 1.0;
    for (int k = 1; k < n; ++k) next[k] = a[k] + m * std::conj(a[n - k]);
    next[n] = m;
    a = next;
  }
  return mu;
}

/// Random stable reflection sequence with |mu| <= bound.
inline std::vector<cplx> random_reflections(int count, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.0, bound);
  std::uniform_real_distribution<double> ph(-std::numbers::pi, std::numbers::pi);
  std::vector<cplx> mu;
  for (int i = 0; i < count; ++i) mu.push_back(std::polar(mag(rng), ph(rng)));
  return mu;
}

/// Random Hermitian Toeplitz matrix with r_0 = diag.
inline CMatrix random_hermitian_toeplitz(int k, double diag, std::mt19937_64& rng) {
  std::vector<cplx> r(k);
  r[0] = diag;
  for (int i = 1; i < k; ++i) r[i] = cgauss(rng);
  CMatrix m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = i >= j ? r[i - j] : std::conj(r[j - i]);
  return m;
}

/// Product of sines of principal angles via the cosines' SVD.
inline double sine_product(const CMatrix& u1, const CMatrix& u2) {
  Eigen::JacobiSVD<CMatrix> svd(u1.adjoint() * u2);
  double p = 1.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double c = std::min(1.0, svd.singularValues()(i));
    p *= std::sqrt(std::max(0.0, 1.0 - c * c));
  }
  return p;
}

/// Volume of the 2s-column concatenation [U1, U2].
inline double concat_volume(const CMatrix& u1, const CMatrix& u2) {
  CMatrix c(u1.rows(), u1.cols() + u2.cols());
  c << u1, u2;
  Eigen::JacobiSVD<CMatrix> svd(c);
  return svd.singularValues().prod();
}

/// Largest principal angle between two orthonormal bases.
inline double max_angle(const CMatrix& u1, const CMatrix& u2) {
  Eigen::JacobiSVD<CMatrix> svd(u1.adjoint() * u2);
  const double smallest = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(smallest);
}


/// Moves the subspace of u0 along a random geodesic so that its largest
/// principal angle to u0 equals `angle`.
inline CMatrix perturb(const CMatrix& u0, double angle, std::mt19937_64& rng) {
  const Eigen::Index k = u0.rows();
  const CMatrix z = gaussian(k, u0.cols(), rng);
  const CMatrix h = z - u0 * (u0.adjoint() * z);
  Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues() * (angle / svd.singularValues()(0));
  Eigen::VectorXd c = sigma.array().cos();
  Eigen::VectorXd s = sigma.array().sin();
  const CMatrix v = svd.matrixV();
  return u0 * v * c.cast<cplx>().asDiagonal() * v.adjoint() + svd.matrixU() * s.cast<cplx>().asDiagonal() * v.adjoint();
}

}  // namespace oracle
