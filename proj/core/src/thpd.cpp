#include "bgvcf/thpd.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace bgvcf::thpd {

namespace {

// a^{(n)} from a^{(n-1)} and mu_n; a_0 = 1 throughout.
void levinson_step(std::vector<cplx>& a, cplx mu) {
  const std::size_t n = a.size();  // new order
  std::vector<cplx> next(n + 1);
  next[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) next[k] = a[k] + mu * std::conj(a[n - k]);
  next[n] = mu;
  a = std::move(next);
}

}  // namespace

ReflectionSpectrum burg_reflection(std::span<const cplx> x, double psi1, int order) {
  const int len = static_cast<int>(x.size());
  if (len < 2) throw InputError("burg_reflection: snapshot needs at least two samples");
  if (!(psi1 >= 0.0) || !std::isfinite(psi1)) throw InputError("burg_reflection: psi1 must be >= 0");
  if (order < 0) order = len - 1;
  if (order > len - 1) {
    throw InputError("burg_reflection: order " + std::to_string(order) + " exceeds length - 1");
  }

  ReflectionSpectrum out;
  out.psi1 = psi1;
  double p0 = 0.0;
  for (const auto& v : x) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw InputError("burg_reflection: non-finite sample");
    }
    p0 += std::norm(v);
  }
  p0 /= len;
  if (!(p0 > 0.0)) throw NumericalError("burg_reflection: all-zero snapshot (P0 = 0)");
  out.p0 = p0;
  out.prediction_powers.push_back(p0);

  std::vector<cplx> f(x.begin(), x.end());
  std::vector<cplx> b(x.begin(), x.end());
  std::vector<cplx> a{1.0};
  const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;

  for (int n = 1; n <= order; ++n) {
    // Error products over k = n .. len-1 (f at k, b at k-1).
    cplx cross = 0.0;
    double energy = 0.0;
    for (int k = n; k < len; ++k) {
      cross += f[k] * std::conj(b[k - 1]);
      energy += std::norm(f[k]) + std::norm(b[k - 1]);
    }
    const double span_len = static_cast<double>(len - n);
    cplx numerator = 2.0 * cross / span_len;
    double denominator = energy / span_len;

    if (psi1 > 0.0) {
      for (int k = 1; k <= n - 1; ++k) {
        const double nu = psi1 * two_pi_sq * static_cast<double>((k - n) * (k - n));
        numerator += 2.0 * nu * a[k] * a[n - k];
      }
      for (int k = 0; k <= n - 1; ++k) {
        const double nu = psi1 * two_pi_sq * static_cast<double>((k - n) * (k - n));
        denominator += 2.0 * nu * std::norm(a[k]);
      }
    }

    cplx mu = denominator > 0.0 ? -numerator / denominator : cplx{0.0};
    if (std::abs(mu) >= kMaxReflection) {
      mu *= kMaxReflection / std::abs(mu);
      ++out.clamped;
    }
    out.mu.push_back(mu);
    out.prediction_powers.push_back(out.prediction_powers.back() * (1.0 - std::norm(mu)));

    levinson_step(a, mu);
    // Update from the top down so b[k-1] still holds stage n-1 values.
    for (int k = len - 1; k >= n; --k) {
      const cplx fk = f[k];
      const cplx bk = b[k - 1];
      f[k] = fk + mu * bk;
      b[k] = bk + std::conj(mu) * fk;
    }
  }
  return out;
}

std::vector<cplx> reconstruct_autocorrelation(const ReflectionSpectrum& spec, int dimension) {
  if (dimension < 1) throw InputError("reconstruct_autocorrelation: dimension must be >= 1");
  if (!(spec.p0 > 0.0)) throw InputError("reconstruct_autocorrelation: P0 must be positive");

  std::vector<cplx> r(dimension);
  r[0] = spec.p0;
  std::vector<cplx> a{1.0};
  double power = spec.p0;
  for (int n = 1; n < dimension; ++n) {
    const cplx mu = n - 1 < static_cast<int>(spec.mu.size()) ? spec.mu[n - 1] : cplx{0.0};
    cplx acc = -mu * power;
    for (int k = 1; k <= n - 1; ++k) acc -= a[k] * r[n - k];
    r[n] = acc;
    levinson_step(a, mu);
    power *= 1.0 - std::norm(mu);
  }
  return r;
}

CMatrix assemble_thpd(std::span<const cplx> autocorrelation) {
  const auto dim = static_cast<Eigen::Index>(autocorrelation.size());
  if (dim < 1) throw InputError("assemble_thpd: empty autocorrelation");
  if (!(autocorrelation[0].real() > 0.0)) {
    throw InputError("assemble_thpd: r_0 must be real positive");
  }
  CMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    m(i, i) = autocorrelation[0].real();
    for (Eigen::Index j = 0; j < i; ++j) {
      m(i, j) = autocorrelation[i - j];
      m(j, i) = std::conj(autocorrelation[i - j]);
    }
  }
  return m;
}

ThpdCovariance thpd_covariance(const sim::SpaceTimeSnapshot& snapshot, const BurgOptions& options) {
  const auto& x = snapshot.data;
  const auto spec =
      burg_reflection(std::span<const cplx>(x.data(), static_cast<std::size_t>(x.size())),
                      options.psi1, options.order);
  ThpdCovariance out;
  out.autocorrelation = reconstruct_autocorrelation(spec, static_cast<int>(x.size()));
  out.cell_index = snapshot.cell_index;
  out.clamped = spec.clamped;
  return out;
}

std::vector<ThpdCovariance> thpd_covariances(std::span<const sim::SpaceTimeSnapshot> snapshots,
                                             const BurgOptions& options) {
  std::vector<ThpdCovariance> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(thpd_covariance(s, options));
  return out;
}

}  // namespace bgvcf::thpd
