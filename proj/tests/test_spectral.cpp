#include <gtest/gtest.h>

#include <filesystem>

#include "jtmodel/convergence.hpp"
#include "jtmodel/spectral.hpp"
#include "oracles.hpp"

namespace {

using namespace jt;

ModelParams params(double wa, double wb, double d, double ga, double gb, int n) {
  return ModelParams{wa, wb, d, ga, gb, n, n};
}

TEST(Spectral, DecoupledEnergies) {
  const ModelParams m = params(1.0, std::sqrt(2.0), 3.3, 0.0, 0.0, 5);
  const auto spec = solve<double>(m);
  std::vector<double> expected;
  for (Index i = 0; i < m.space().dim(); ++i) expected.push_back(h0_energy(m, m.space().decode(i)));
  std::sort(expected.begin(), expected.end());
  for (Index k = 0; k < spec.size(); ++k) EXPECT_NEAR(spec.energy(k), expected[static_cast<std::size_t>(k)], 1e-13);
  const auto [e, psi] = ground_state(spec);
  EXPECT_NEAR(e, -1.65, 1e-14);
  EXPECT_NEAR(std::abs(psi(m.space().encode({Spin::Down, 0, 0}))), 1.0, 1e-14);
}

TEST(Spectral, SectorUnionEqualsFullSpectrum) {
  const ModelParams m = params(1.0, 0.8, 3.0, 0.6, 0.9, 6);
  const auto full = solve<cplx>(m, Sector::Full);
  const auto even = solve<cplx>(m, Sector::Even);
  const auto odd = solve<cplx>(m, Sector::Odd);
  std::vector<double> merged;
  for (Index k = 0; k < even.size(); ++k) merged.push_back(even.energy(k));
  for (Index k = 0; k < odd.size(); ++k) merged.push_back(odd.energy(k));
  std::sort(merged.begin(), merged.end());
  ASSERT_EQ(static_cast<Index>(merged.size()), full.size());
  for (Index k = 0; k < full.size(); ++k) EXPECT_NEAR(merged[static_cast<std::size_t>(k)], full.energy(k), 1e-10);
  const auto autos = solve<cplx>(m, Sector::Auto);
  for (Index k = 0; k < full.size(); ++k) EXPECT_NEAR(autos.energy(k), full.energy(k), 1e-10);
}

TEST(Spectral, JacobiOracleSmallInstances) {
  for (int n : {1, 2}) {
    ModelParams m = from_dimensionless({0.5, 0.5, 2.0, 2.0}, n, n);
    const auto spec = solve<cplx>(m, Sector::Full);
    const Eigen::MatrixXcd h(build_h_jt(m, m.space()).entries);
    const auto ref = oracle::jacobi_eigenvalues(h);
    ASSERT_EQ(static_cast<Index>(ref.size()), spec.size());
    for (Index k = 0; k < spec.size(); ++k) EXPECT_NEAR(spec.energy(k), ref[static_cast<std::size_t>(k)], 1e-12);
  }
}

TEST(Spectral, ResidualsOrthonormalityAndParityPurity) {
  const ModelParams m = params(1.0, 0.7, 4.0, 0.9, 0.5, 7);
  const auto h = build_h_jt(m, m.space(), Gauge::Complex);
  const auto pi = build_parity(m.space());
  const auto spec = solve<cplx>(m, Sector::Full);
  Eigen::MatrixXcd v(spec.dim(), spec.size());
  for (Index mu = 0; mu < spec.size(); ++mu) v.col(mu) = spec.state(mu);
  EXPECT_LT((v.adjoint() * v - Eigen::MatrixXcd::Identity(spec.size(), spec.size())).cwiseAbs().maxCoeff(), 1e-10);
  const double hnorm = std::max(std::abs(spec.energy(0)), std::abs(spec.energy(spec.size() - 1)));
  for (Index mu = 0; mu < spec.size(); ++mu) {
    const QuantumState psi = v.col(mu);
    EXPECT_LE((h.entries * psi - spec.energy(mu) * psi).norm(), 1e-9 * hnorm);
    bool degenerate = false;
    for (const auto& [a, b] : spec.degenerate_pairs()) degenerate |= (a == mu || b == mu);
    if (degenerate) continue;
    const QuantumState ppsi = pi.entries * psi;
    const double s = std::real(psi.dot(ppsi)) > 0 ? 1.0 : -1.0;
    EXPECT_LT((ppsi - s * psi).norm(), 1e-8);
  }
}

TEST(Spectral, RejectsNonHermitianInput) {
  const HilbertSpace space(1, 1);
  OperatorMatrix m{build_annihilation(1, Mode::A, space).entries, false};
  EXPECT_THROW(diagonalize<cplx>(m, Sector::Full, space), DomainError);
  EXPECT_THROW(diagonalize<double>(build_h_jt(params(1, 1, 1, 0.2, 0.3, 1), space, Gauge::Complex), Sector::Full, space),
               DomainError);
}

TEST(Spectral, FingerprintDistinguishesInputs) {
  const ModelParams m = params(1.0, 0.8, 3.0, 0.6, 0.9, 6);
  ModelParams m2 = m;
  m2.n_max_b = 7;
  EXPECT_EQ(fingerprint(m, Gauge::Real, Sector::Auto), fingerprint(m, Gauge::Real, Sector::Auto));
  EXPECT_NE(fingerprint(m, Gauge::Real, Sector::Auto), fingerprint(m2, Gauge::Real, Sector::Auto));
  EXPECT_NE(fingerprint(m, Gauge::Real, Sector::Auto), fingerprint(m, Gauge::Complex, Sector::Auto));
}

TEST(Spectral, DiskCacheRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "jtmodel_cache_test";
  std::filesystem::remove_all(dir);
  const ModelParams m = params(1.0, 0.8, 3.0, 0.6, 0.9, 4);
  SpectrumCache writer(dir, 0);
  const auto a = writer.get_or_compute<double>(m, Sector::Auto);
  ASSERT_FALSE(std::filesystem::is_empty(dir));
  const auto file = dir / (to_hex(a->fingerprint()) + ".jtspec");
  const auto b = read_spectrum<double>(file, a->fingerprint(), canonical_params(m, Gauge::Real, Sector::Auto));
  ASSERT_TRUE(b);
  EXPECT_EQ(a->energies(), b->energies());
  for (std::size_t k = 0; k < a->blocks().size(); ++k) EXPECT_EQ(a->blocks()[k].vectors, b->blocks()[k].vectors);
  EXPECT_FALSE(read_spectrum<cplx>(file, a->fingerprint(), canonical_params(m, Gauge::Real, Sector::Auto)));
  EXPECT_FALSE(read_spectrum<double>(file, a->fingerprint() + 1, canonical_params(m, Gauge::Real, Sector::Auto)));
  std::filesystem::remove_all(dir);
}

TEST(Convergence, DecoupledGroundEnergyIsTruncationIndependent) {
  const auto rep = convergence_scan(params(1, 1, 5, 0, 0, 1), {2, 4, 6}, ConvergenceMetric::GroundEnergy);
  for (std::size_t k = 1; k < rep.rows.size(); ++k) EXPECT_EQ(*rep.rows[k].relative_change, 0.0);
  EXPECT_EQ(rep.converged_at, 4);
  EXPECT_EQ(rep.status, "converged");
}

TEST(Convergence, DeepNormalPhaseConvergesEarly) {
  const auto p = from_dimensionless({0.3, 0.3, 10, 10}, 1, 1);
  ConvergenceOptions opt;
  opt.tolerance = 1e-6;
  const auto rep = convergence_scan(p, {2, 4, 6, 8, 10}, ConvergenceMetric::GroundEnergy, opt);
  ASSERT_TRUE(rep.converged_at);
  EXPECT_LE(*rep.converged_at, 10);
}

TEST(Convergence, NonConvergenceIsAStatusNotAnError) {
  const auto p = from_dimensionless({0.3, 1.2, 40, 40}, 1, 1);
  ConvergenceOptions opt;
  opt.tolerance = 1e-12;
  const auto rep = convergence_scan(p, {2, 3, 4}, ConvergenceMetric::GroundEnergy, opt);
  EXPECT_EQ(rep.status, "not_converged");
  EXPECT_THROW(convergence_scan(p, {4, 2}, ConvergenceMetric::GroundEnergy), ConfigError);
}

TEST(Convergence, SuperRadiantNeedsTruncationBeyondOccupation) {
  const auto p = from_dimensionless({0.3, 1.2, 40, 40}, 1, 1);
  const double nb = 40 * (std::pow(1.2, 4) - 1) / (4 * 1.44);
  const auto rep = convergence_scan(p, {6, 12, 18, 24, 30, 36}, ConvergenceMetric::GroundEnergy,
                                    ConvergenceOptions{1e-4});
  ASSERT_TRUE(rep.converged_at);
  EXPECT_GT(*rep.converged_at, nb);
}

}  // namespace
