#include <gtest/gtest.h>

#include <random>

#include "jtmodel/meanfield.hpp"
#include "jtmodel/spectral.hpp"

namespace {

using namespace jt;

ModelParams at(double la, double lb, double eta_a, double eta_b, int na = 4, int nb = 4) {
  return from_dimensionless({la, lb, eta_a, eta_b}, na, nb);
}

TEST(MeanField, ClassifyPhase) {
  EXPECT_EQ(classify_phase(1.5 * 2 / std::sqrt(90.0), 2.0 * 2 / std::sqrt(100.0)), Phase::Normal);
  EXPECT_EQ(classify_phase(0.316, 1.1), Phase::BSuper);
  EXPECT_EQ(classify_phase(1.2, 0.3), Phase::ASuper);
  EXPECT_EQ(classify_phase(0.0, 0.0), Phase::Normal);
  EXPECT_EQ(classify_phase(1.0, 1.0), Phase::Normal);
  EXPECT_THROW(classify_phase(1.2, 1.2), DegenerateBoundaryError);
  EXPECT_THROW(classify_phase(-0.1, 0.2), DomainError);
}

TEST(MeanField, BSuperClosedForm) {
  const auto r = mean_field_report(at(0.316, 1.1, 30.0, 30.0));
  EXPECT_EQ(r.phase, Phase::BSuper);
  EXPECT_NEAR(r.nb_density, (std::pow(1.1, 4) - 1.0) / (4.0 * 1.21), 1e-14);
  EXPECT_NEAR(r.nb_density, 0.09589, 1e-5);
  EXPECT_NEAR(r.sz_mean, -0.82645, 1e-5);
  EXPECT_EQ(r.na_density, 0.0);
  const auto p = at(0.316, 1.1, 30.0, 30.0);
  EXPECT_NEAR(r.gap, p.omega_a * std::sqrt(1 - std::pow(0.316 / 1.1, 2)) + p.omega_b * std::sqrt(1 - std::pow(1.1, -4)),
              1e-12);
}

TEST(MeanField, NormalPhaseLimits) {
  const auto crit = at(1.0, 1.0, 20.0, 25.0);
  const auto rc = mean_field_report(crit);
  EXPECT_EQ(rc.phase, Phase::Normal);
  EXPECT_NEAR(rc.gap, 0.0, 1e-7);
  EXPECT_EQ(rc.sz_mean, -1.0);
  EXPECT_EQ(rc.na_density + rc.nb_density, 0.0);

  const auto p = at(0.0, 0.0, 20.0, 25.0);
  const auto r0 = mean_field_report(p);
  EXPECT_NEAR(r0.gap, p.omega_a + p.omega_b, 1e-14);
  EXPECT_NEAR(r0.ground_energy, -p.delta / 2, 1e-12);

  EXPECT_NEAR(mean_field_report(at(0.2, 0.96, 10, 10)).squeeze_b, -0.25 * std::log(1 - 0.9216), 1e-14);
  EXPECT_NEAR(mean_field_report(at(0.2, 0.96, 10, 10)).squeeze_b, 0.6365, 1e-4);
}

TEST(MeanField, ContinuityAndFirstOrderJump) {
  double previous = 1.0;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double d = mean_field_report(at(0.3, 1.0 + eps, 30, 30)).nb_density;
    EXPECT_LT(d, previous);
    previous = d;
  }
  EXPECT_LT(previous, 1e-3);

  const double lb = 1.13;
  const auto below = mean_field_report(at(lb - 1e-3, lb, 40, 40));
  const auto above = mean_field_report(at(lb + 1e-3, lb, 40, 40));
  EXPECT_EQ(below.na_density, 0.0);
  const double la = lb + 1e-3;
  EXPECT_NEAR(above.na_density, (std::pow(la, 4) - 1) / (4 * la * la), 1e-14);
  EXPECT_GT(above.na_density, 0.05);
}

TEST(MeanField, StationarySpinRotationIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1.01, 2.5);
  for (int k = 0; k < 20; ++k) {
    const double la = u(rng);
    const auto p = at(la, 0.4, 35.0, 50.0);
    const auto r = mean_field_report(p);
    EXPECT_NEAR(r.omega_tilde, p.delta * la * la, 1e-10 * p.delta * la * la);
    EXPECT_NEAR(std::cos(2 * r.spin_angle), -p.delta / r.omega_tilde, 1e-12);
    // <sz> of sin t|down> - cos t|up> is cos^2 t - sin^2 t = cos 2t
    EXPECT_NEAR(std::cos(2 * r.spin_angle), r.sz_mean, 1e-12);
  }
}

TEST(MeanField, GroundStateDecoupledIsVacuum) {
  const auto p = at(0.0, 0.0, 10, 10, 5, 5);
  const QuantumState psi = ground_state_construction(mean_field_report(p), p.space());
  EXPECT_LT((psi - basis_state({Spin::Down, 0, 0}, p.space())).norm(), 1e-15);
}

TEST(MeanField, TruncationErrorOnNormLoss) {
  const auto p = at(0.3, 1.5, 50, 50, 3, 3);
  EXPECT_THROW(ground_state_construction(mean_field_report(p), p.space()), TruncationError);
}

TEST(MeanField, NormalPhaseAgreesWithExactDiagonalization) {
  const auto p = at(0.5, 0.5, 50, 50, 16, 16);
  const auto spec = solve<double>(p);
  const auto mf = mean_field_report(p);
  EXPECT_LT(std::abs(spec.energy(0) - mf.ground_energy), 0.02 * std::abs(mf.ground_energy));

  const QuantumState psi = ground_state_construction(mf, p.space(), Gauge::Real);
  const QuantumState g0 = spec.state(0);
  EXPECT_GT(std::norm(g0.dot(psi)), 0.95);
  // variational bound
  const double e_mf = expectation(psi, build_h_jt(p, p.space(), Gauge::Real)).real();
  EXPECT_GE(e_mf, spec.energy(0) - 1e-12);
}

TEST(MeanField, BSuperSpinPolarizationMatchesExactDiagonalization) {
  const auto p = at(0.5, 1.3, 50, 50, 12, 60);
  const auto spec = solve<double>(p);
  const auto [e0, psi] = ground_state(spec);
  const double sz = expectation(psi, build_pauli(Axis::Z, p.space())).real();
  EXPECT_LT(std::abs(sz - (-1 / 1.69)), 0.05 * (1 / 1.69));
  const QuantumState mf = ground_state_construction(mean_field_report(p), p.space(), Gauge::Real);
  EXPECT_GE(expectation(mf, build_h_jt(p, p.space(), Gauge::Real)).real(), e0 - 1e-12);
}

}  // namespace
