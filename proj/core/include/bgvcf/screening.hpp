#pragma once

#include <span>
#include <vector>

#include "bgvcf/thpd.hpp"
#include "bgvcf/types.hpp"

namespace bgvcf::screening {

/// Radii within this relative distance of the threshold count as clutter.
inline constexpr double kTieTolerance = 1e-12;

struct BrauerDisc {
  double center = 0.0;  // constant diagonal r_0
  double radius = 0.0;  // D = max_{i != j} sqrt(a_i a_j)
};

/// Disc for a dense square matrix: a_i is the off-diagonal absolute row sum
/// and the center is R[0][0]. Every eigenvalue of a constant-diagonal matrix
/// satisfies |lambda - r_0| <= D.
BrauerDisc brauer_radius(const CMatrix& matrix);

/// Same disc computed directly from the autocorrelation in O(K).
BrauerDisc brauer_radius(const thpd::ThpdCovariance& covariance);

/// T_B = AM(centers) / GM(centers) * rho. The geometric mean is taken in the
/// log domain.
double brauer_threshold(std::span<const double> centers, double rho);

struct BrauerSummary {
  int cell_index = -1;
  double center = 0.0;
  double radius = 0.0;
  bool is_clutter = true;
  double threshold = 0.0;
  double rho = 0.0;
};

struct ScreeningResult {
  std::vector<BrauerSummary> summaries;  // input order
  std::vector<int> clutter_cells;
  std::vector<int> target_cells;
  double threshold = 0.0;
  double rho = 0.0;
};

/// rho is the smallest radius of the batch. A cell is clutter when
/// D <= T_B (1 + kTieTolerance).
ScreeningResult screen(std::span<const thpd::ThpdCovariance> matrices);

/// Screens precomputed discs; `cells` labels them.
ScreeningResult screen_discs(std::span<const BrauerDisc> discs, std::span<const int> cells);

}  // namespace bgvcf::screening
