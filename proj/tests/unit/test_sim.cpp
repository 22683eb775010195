#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bgvcf/sim.hpp"
#include "oracles.hpp"

using namespace bgvcf;

namespace {

sim::ScenarioConfig small_scenario() {
  sim::ScenarioConfig c;
  c.num_elements = 4;
  c.num_pulses = 5;
  c.num_clutter_patches = 31;
  c.num_range_cells = 12;
  c.rng_seed = 7;
  return c;
}

}  // namespace

TEST_CASE("steering vector: trivial cases") {
  const CVector ones = sim::steering_vector(0.0, 0.0, 3, 2);
  CHECK(ones.size() == 6);
  CHECK((ones - CVector::Ones(6)).norm() == doctest::Approx(0.0));

  const CVector alt = sim::steering_vector(0.5, 0.0, 2, 1);
  CHECK(std::abs(alt(0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(alt(1) - cplx(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering vector: element-wise against direct evaluation") {
  const int m_len = 10;
  const int n_len = 12;
  const CVector v = sim::steering_vector(0.25, 0.1, m_len, n_len);
  for (int m = 0; m < m_len; ++m) {
    for (int n = 0; n < n_len; ++n) {
      const cplx expected = std::exp(cplx(0.0, 2.0 * std::numbers::pi * (0.25 * m + 0.1 * n)));
      CHECK(std::abs(v(m * n_len + n) - expected) < 1e-12);
      CHECK(std::abs(std::abs(v(m * n_len + n)) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("steering vector: Kronecker structure") {
  const int m_len = 4;
  const int n_len = 3;
  const CVector v = sim::steering_vector(-0.13, 0.31, m_len, n_len);
  const CVector vd = sim::steering_vector(-0.13, 0.0, m_len, 1);
  const CVector vs = sim::steering_vector(0.0, 0.31, 1, n_len);
  for (int m = 0; m < m_len; ++m)
    for (int n = 0; n < n_len; ++n) CHECK(std::abs(v(m * n_len + n) - vd(m) * vs(n)) < 1e-13);
}

TEST_CASE("steering vector rejects non-finite input") {
  CHECK_THROWS_AS(sim::steering_vector(std::nan(""), 0.0, 2, 2), InputError);
  CHECK_THROWS_AS(sim::steering_vector(0.0, INFINITY, 2, 2), InputError);
}

TEST_CASE("reference scenario geometry") {
  const sim::ScenarioConfig c;
  CHECK(c.wavelength() == doctest::Approx(0.2));
  CHECK(c.spacing() == doctest::Approx(0.1));
  CHECK(c.beta() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.dimension() == 120);
}

TEST_CASE("patch frequencies are midpoints of a uniform sine grid") {
  sim::ScenarioConfig c;
  c.num_clutter_patches = 4;
  const auto f = sim::patch_spatial_frequencies(c);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == doctest::Approx(0.5 * -0.75));
  CHECK(f[3] == doctest::Approx(0.5 * 0.75));
}

TEST_CASE("single patch covariance is rank one plus noise") {
  sim::ScenarioConfig c = small_scenario();
  c.num_clutter_patches = 1;  // sin(theta) = 0, f_s = 0
  c.cnr_db = 20.0;
  const CMatrix r = sim::clutter_covariance(c);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
  const auto& ev = eig.eigenvalues();
  const double dim = c.dimension();
  CHECK(ev(ev.size() - 1) == doctest::Approx(1.0 + 100.0 * dim).epsilon(1e-10));
  for (Eigen::Index i = 0; i + 1 < ev.size(); ++i) CHECK(ev(i) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reference scenario CNR and structure") {
  const sim::ScenarioConfig c;
  const CMatrix r = sim::clutter_covariance(c);
  const double ratio = (r.trace().real() - c.dimension() * c.noise_variance) / (c.dimension() * c.noise_variance);
  CHECK(ratio == doctest::Approx(1e5).epsilon(0.01));
  CHECK((r - r.adjoint()).norm() <= 1e-10 * r.norm());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= c.noise_variance * (1.0 - 1e-8));
}

TEST_CASE("Capon spectrum: identity and ridge") {
  const auto grid = sim::linear_grid(21);
  const auto p = sim::capon_spectrum(CMatrix::Identity(6, 6), grid, grid, 3, 2);
  CHECK((p.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-12);

  const sim::ScenarioConfig c;
  const CMatrix r = sim::clutter_covariance(c);
  const auto fine = sim::linear_grid(41);
  const auto spec = sim::capon_spectrum(r, fine, fine, c.temporal_len(), c.spatial_len());
  // With beta = 1 the strongest response of every Doppler row sits on f_s = f_d.
  for (Eigen::Index i = 5; i < spec.rows() - 5; ++i) {
    Eigen::Index j = 0;
    spec.row(i).maxCoeff(&j);
    CHECK(std::abs(fine[static_cast<std::size_t>(j)] - fine[static_cast<std::size_t>(i)]) < 0.026);
  }
}

TEST_CASE("Capon spectrum matches Sherman-Morrison for rank one plus identity") {
  const int m_len = 3;
  const int n_len = 4;
  const double g = 50.0;
  const CVector u = sim::steering_vector(0.2, -0.1, m_len, n_len);
  const CMatrix r = CMatrix::Identity(12, 12) + g * u * u.adjoint();
  const std::vector<double> fd{-0.3, 0.2, 0.45};
  const std::vector<double> fs{-0.1, 0.0, 0.3};
  const auto p = sim::capon_spectrum(r, fd, fs, m_len, n_len);
  for (std::size_t i = 0; i < fd.size(); ++i) {
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const CVector v = sim::steering_vector(fd[i], fs[j], m_len, n_len);
      // v^H (I + g u u^H)^-1 v = v^H v - g |u^H v|^2 / (1 + g u^H u)
      const double q = v.squaredNorm() - g * std::norm(u.dot(v)) / (1.0 + g * u.squaredNorm());
      CHECK(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(1.0 / q).epsilon(1e-10));
    }
  }
}

TEST_CASE("generation is deterministic per seed and differs across seeds") {
  const auto c = small_scenario();
  const auto a = sim::generate_clutter(c);
  const auto b = sim::generate_clutter(c);
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) CHECK(a.snapshots[i].data == b.snapshots[i].data);
  auto c2 = c;
  c2.rng_seed = 8;
  const auto d = sim::generate_clutter(c2);
  CHECK(a.snapshots[0].data != d.snapshots[0].data);
}

TEST_CASE("texture has unit mean and unit value when disabled") {
  auto c = small_scenario();
  c.texture_db = 0.0;
  for (double t : sim::generate_clutter(c).textures) CHECK(t == 1.0);
  c.texture_db = 3.0;
  c.num_range_cells = 4000;
  c.num_clutter_patches = 1;
  const auto textures = sim::generate_clutter(c).textures;
  double mean = 0.0;
  for (double t : textures) mean += t;
  mean /= static_cast<double>(textures.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sample covariance converges to the ideal covariance") {
  auto c = small_scenario();
  c.texture_db = 0.0;
  c.num_range_cells = 20 * c.dimension();
  const auto clutter = sim::generate_clutter(c);
  CMatrix s = CMatrix::Zero(c.dimension(), c.dimension());
  for (const auto& x : clutter.snapshots) s += x.data * x.data.adjoint();
  s /= static_cast<double>(clutter.snapshots.size());
  CHECK((s - clutter.ideal_covariance).norm() / clutter.ideal_covariance.norm() < 0.15);
}

TEST_CASE("target injection is additive and validated") {
  const auto c = small_scenario();
  const auto base = sim::simulate(c, {});
  auto t = sim::TargetSpec::from_snr({3, 4}, 0.25, 0.0, 10.0, c.noise_variance);
  CHECK(std::abs(t.amplitude) == doctest::Approx(std::sqrt(10.0)));
  const std::vector<sim::TargetSpec> targets{t};
  const auto with = sim::inject_targets(base, targets);
  const CVector v = t.amplitude * sim::steering_vector(0.25, 0.0, c.temporal_len(), c.spatial_len());
  for (int cell = 0; cell < c.num_range_cells; ++cell) {
    const CVector diff = with.at(cell).data - base.at(cell).data;
    if (cell == 3 || cell == 4) {
      CHECK((diff - v).norm() < 1e-12);
    } else {
      CHECK(diff.norm() == 0.0);
    }
  }
  CHECK(with.targets.size() == 1);

  const auto unchanged = sim::inject_targets(base, {});
  CHECK(unchanged.at(0).data == base.at(0).data);

  auto bad = t;
  bad.range_cells = {99};
  const std::vector<sim::TargetSpec> bad_targets{bad};
  CHECK_THROWS_AS(sim::inject_targets(base, bad_targets), InputError);
  bad.range_cells = {};
  const std::vector<sim::TargetSpec> empty_cells{bad};
  CHECK_THROWS_AS(sim::inject_targets(base, empty_cells), InputError);
}

TEST_CASE("per-cell covariance applies the texture to clutter only") {
  const auto c = small_scenario();
  const auto d = sim::simulate(c, {});
  const CMatrix r = d.cell_covariance(2);
  const CMatrix expected = d.textures[2] * (*d.ideal_clutter_covariance - c.noise_variance * CMatrix::Identity(20, 20)) +
                           c.noise_variance * CMatrix::Identity(20, 20);
  CHECK((r - expected).norm() < 1e-9 * r.norm());
  CHECK_THROWS_AS((void)d.cell_covariance(99), InputError);
}

TEST_CASE("scenario validation") {
  sim::ScenarioConfig c;
  c.num_elements = 1;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.cnr_db = INFINITY;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.noise_variance = 0.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.element_spacing = -1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
}
