#include <gtest/gtest.h>

#include <numbers>

#include "jtmodel/dynamics.hpp"
#include "oracles.hpp"

namespace {

using namespace jt;

ModelParams coupled(int n) { return from_dimensionless({0.9, 1.2, 8.0, 6.0}, n, n); }

std::vector<double> linspace(double t_max, int points) { return TimeGrid{t_max, points}.times(); }

TEST(Dynamics, TimeZeroAndNorm) {
  const auto spec = solve<double>(coupled(8));
  const auto st = expand_initial(BasisLabel{Spin::Down, 2, 3}, spec);
  EXPECT_LT((evolve(st, spec, 0.0) - st.vector).norm(), 1e-12);
  EXPECT_NEAR(evolve(st, spec, 1e3).norm(), 1.0, 1e-10);
}

TEST(Dynamics, EigenstateOnlyAcquiresPhase) {
  const auto spec = solve<cplx>(coupled(6));
  const auto st = expand_initial(spec.state(11), spec);
  for (double t : {0.5, 3.0, 40.0}) {
    const QuantumState psi = evolve(st, spec, t);
    EXPECT_NEAR(std::abs(psi.dot(st.vector)), 1.0, 1e-12);
  }
  const auto p = ObservableSpec::make(ObservableKind::SpinProjectorDown, spec.space());
  const auto d = distance_to_de(st, p, spec, linspace(20.0, 50));
  for (double v : d.values) EXPECT_LT(v, 1e-12);
}

TEST(Dynamics, SpectralEvolutionMatchesRungeKutta) {
  const ModelParams m = ModelParams{1.0, 0.8, 2.0, 0.45, 0.35, 4, 4};
  const auto spec = solve<cplx>(m, Sector::Full);
  const auto st = expand_initial(BasisLabel{Spin::Down, 1, 2}, spec);
  const Eigen::MatrixXcd h(build_h_jt(m, m.space(), Gauge::Complex).entries);
  Eigen::VectorXcd psi = st.vector;
  double t_prev = 0.0;
  for (double t : {5.0, 20.0, 50.0}) {
    psi = oracle::rk4_evolve(h, psi, t - t_prev, 2e-3);
    t_prev = t;
    EXPECT_LT((evolve(st, spec, t) - psi).norm(), 1e-6) << "t = " << t;
  }
}

TEST(Dynamics, ConservationLaws) {
  const ModelParams m = coupled(8);
  const auto spec = solve<double>(m);
  const auto st = expand_initial(BasisLabel{Spin::Down, 3, 1}, spec);
  const auto h = build_h_jt(m, m.space(), Gauge::Real);
  const auto pi = build_parity(m.space());
  for (double t : {0.0, 1.7, 33.0, 250.0}) {
    const QuantumState psi = evolve(st, spec, t);
    EXPECT_NEAR(expectation(psi, h).real(), st.energy_e0, 1e-9 * std::abs(st.energy_e0));
    EXPECT_NEAR(expectation(psi, pi).real(), 1.0, 1e-9);
  }
}

TEST(Dynamics, SpinSeriesAndEntropyBounds) {
  const auto spec = solve<double>(coupled(8));
  const auto st = expand_initial(BasisLabel{Spin::Down, 2, 2}, spec);
  const auto p = ObservableSpec::make(ObservableKind::SpinProjectorDown, spec.space());
  const auto times = linspace(60.0, 300);
  const auto series = observable_series(st, p, spec, times);
  EXPECT_NEAR(series.values.front(), 1.0, 1e-12);
  const double de = diagonal_average(st, p, spec).value;
  const auto dist = distance_to_de(st, p, spec, times);
  EXPECT_NEAR(dist.values.front(), std::abs(1.0 - de), 1e-12);
  const auto s = renyi_entropy_series(st, spec, times);
  EXPECT_NEAR(s.values.front(), 0.0, 1e-10);
  for (double v : s.values) {
    EXPECT_GE(v, -1e-10);
    EXPECT_LE(v, std::numbers::ln2 + 1e-10);
  }
  EXPECT_GT(*std::max_element(s.values.begin(), s.values.end()), 1e-3);
  EXPECT_THROW(observable_series(st, p, spec, {0.0, 2.0, 1.0}), ConfigError);
}

TEST(Dynamics, GaugeIndependentSpinDynamics) {
  const ModelParams m = coupled(6);
  const auto rs = solve<double>(m);
  const auto cs = solve<cplx>(m);
  const auto p = ObservableSpec::make(ObservableKind::SpinProjectorDown, rs.space());
  const auto times = linspace(30.0, 40);
  const auto a = observable_series(expand_initial(BasisLabel{Spin::Down, 1, 3}, rs), p, rs, times);
  const auto b = observable_series(expand_initial(BasisLabel{Spin::Down, 1, 3}, cs), p, cs, times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-10);
  const auto ea = renyi_entropy_series(expand_initial(BasisLabel{Spin::Down, 1, 3}, rs), rs, times);
  const auto eb = renyi_entropy_series(expand_initial(BasisLabel{Spin::Down, 1, 3}, cs), cs, times);
  for (std::size_t k = 0; k < times.size(); ++k) EXPECT_NEAR(ea.values[k], eb.values[k], 1e-10);
}

TEST(Dynamics, LongTimeMeanAndVarianceMatchEnsembleFormulas) {
  const auto spec = solve<double>(from_dimensionless({0.3, 1.2, 10.0, 10.0}, 14, 14));
  const auto st = expand_initial(BasisLabel{Spin::Down, 2, 3}, spec);
  const auto p = ObservableSpec::make(ObservableKind::SpinProjectorDown, spec.space());
  const auto series = observable_series(st, p, spec, linspace(20000.0, 40000));
  const double mean = cesaro_mean(series);
  double var = 0.0;
  for (double v : series.values) var += (v - mean) * (v - mean);
  var /= double(series.values.size());
  EXPECT_NEAR(mean, diagonal_average(st, p, spec).value, 5e-3);
  const double fluct = time_fluctuations(st, p, spec);
  EXPECT_NEAR(var, fluct, 0.1 * fluct);

  const auto lta = long_time_average(st, p, spec, TimeGrid{500.0, 2000});
  EXPECT_TRUE(lta.converged);
  EXPECT_NEAR(lta.value, diagonal_average(st, p, spec).value, 5e-3);
}

TEST(Dynamics, DefaultGrid) {
  const ModelParams m{2.0, 0.5, 3.0, 0.0, 0.0, 2, 2};
  const auto g = default_time_grid(m);
  EXPECT_EQ(g.points, 2000);
  EXPECT_NEAR(g.t_max, 100 * 2 * std::numbers::pi / 0.5, 1e-12);
  const auto t = g.times();
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_NEAR(t.back(), g.t_max, 1e-12);
}

}  // namespace
