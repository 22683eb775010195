#include "bgvcf/screening.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bgvcf::screening {

namespace {

double top_two_geometric(std::span<const double> row_sums) {
  double first = 0.0;
  double second = 0.0;
  for (double a : row_sums) {
    if (a > first) {
      second = first;
      first = a;
    } else if (a > second) {
      second = a;
    }
  }
  return std::sqrt(first * second);
}

}  // namespace

BrauerDisc brauer_radius(const CMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw InputError("brauer_radius: matrix is not square");
  if (matrix.rows() < 2) throw InputError("brauer_radius: dimension must be >= 2");
  std::vector<double> sums(static_cast<std::size_t>(matrix.rows()), 0.0);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j != i) s += std::abs(matrix(i, j));
    }
    sums[static_cast<std::size_t>(i)] = s;
  }
  return {matrix(0, 0).real(), top_two_geometric(sums)};
}

BrauerDisc brauer_radius(const thpd::ThpdCovariance& covariance) {
  const auto& r = covariance.autocorrelation;
  const std::size_t dim = r.size();
  if (dim < 2) throw InputError("brauer_radius: dimension must be >= 2");
  // prefix[m] = sum_{k=1}^{m} |r_k|; row i has lags 1..i below and 1..K-1-i above.
  std::vector<double> prefix(dim, 0.0);
  for (std::size_t k = 1; k < dim; ++k) prefix[k] = prefix[k - 1] + std::abs(r[k]);
  std::vector<double> sums(dim);
  for (std::size_t i = 0; i < dim; ++i) sums[i] = prefix[i] + prefix[dim - 1 - i];
  return {r[0].real(), top_two_geometric(sums)};
}

double brauer_threshold(std::span<const double> centers, double rho) {
  if (centers.empty()) throw InputError("brauer_threshold: no centers");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InputError("brauer_threshold: rho must be >= 0");
  double sum = 0.0;
  double log_sum = 0.0;
  for (double c : centers) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw InputError("brauer_threshold: centers must be positive");
    }
    sum += c;
    log_sum += std::log(c);
  }
  const double n = static_cast<double>(centers.size());
  const double arithmetic = sum / n;
  const double geometric = std::exp(log_sum / n);
  // AM >= GM holds exactly; rounding can leave the ratio a hair below one.
  return std::max(1.0, arithmetic / geometric) * rho;
}

ScreeningResult screen_discs(std::span<const BrauerDisc> discs, std::span<const int> cells) {
  if (discs.size() < 2) throw InputError("screen: need at least two matrices");
  if (cells.size() != discs.size()) throw InputError("screen: cell labels do not match matrices");

  std::vector<double> centers;
  centers.reserve(discs.size());
  double rho = discs.front().radius;
  for (const auto& d : discs) {
    centers.push_back(d.center);
    rho = std::min(rho, d.radius);
  }
  const double threshold = brauer_threshold(centers, rho);

  ScreeningResult out;
  out.threshold = threshold;
  out.rho = rho;
  for (std::size_t q = 0; q < discs.size(); ++q) {
    BrauerSummary s;
    s.cell_index = cells[q];
    s.center = discs[q].center;
    s.radius = discs[q].radius;
    s.threshold = threshold;
    s.rho = rho;
    s.is_clutter = s.radius <= threshold * (1.0 + kTieTolerance);
    (s.is_clutter ? out.clutter_cells : out.target_cells).push_back(s.cell_index);
    out.summaries.push_back(s);
  }
  return out;
}

ScreeningResult screen(std::span<const thpd::ThpdCovariance> matrices) {
  std::vector<BrauerDisc> discs;
  std::vector<int> cells;
  discs.reserve(matrices.size());
  cells.reserve(matrices.size());
  for (const auto& m : matrices) {
    discs.push_back(brauer_radius(m));
    cells.push_back(m.cell_index);
  }
  return screen_discs(discs, cells);
}

}  // namespace bgvcf::screening
