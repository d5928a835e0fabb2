#include <gtest/gtest.h>

#include <numbers>

#include "jtmodel/hilbert.hpp"

namespace {

using namespace jt;

Eigen::MatrixXcd dense(const OperatorMatrix& m) { return Eigen::MatrixXcd(m.entries); }

TEST(Hilbert, EncodeDecodeRoundTrip) {
  const HilbertSpace space(3, 5);
  EXPECT_EQ(space.dim(), 2 * 4 * 6);
  std::vector<int> seen(static_cast<std::size_t>(space.dim()), 0);
  for (int s = 0; s < 2; ++s)
    for (int na = 0; na <= 3; ++na)
      for (int nb = 0; nb <= 5; ++nb) {
        const BasisLabel l{static_cast<Spin>(s), na, nb};
        const Index i = space.encode(l);
        ++seen[static_cast<std::size_t>(i)];
        const BasisLabel back = space.decode(i);
        EXPECT_EQ(back.spin, l.spin);
        EXPECT_EQ(back.n_a, na);
        EXPECT_EQ(back.n_b, nb);
      }
  for (int c : seen) EXPECT_EQ(c, 1);
  EXPECT_THROW(space.encode({Spin::Up, 4, 0}), ConfigError);
  EXPECT_THROW(HilbertSpace(0, 3), ConfigError);
}

TEST(Hilbert, AnnihilationActsOnModeFactor) {
  const HilbertSpace space(4, 3);
  const auto a = build_annihilation(4, Mode::A, space);
  const QuantumState out = a.entries * basis_state({Spin::Down, 1, 0}, space);
  const QuantumState expect = basis_state({Spin::Down, 0, 0}, space);
  EXPECT_LT((out - expect).norm(), 1e-15);
  EXPECT_LT((a.entries * basis_state({Spin::Up, 0, 2}, space)).norm(), 1e-15);
  EXPECT_THROW(build_annihilation(3, Mode::A, space), ConfigError);
}

TEST(Hilbert, NumberOperatorAndTruncatedCommutator) {
  const int n = 4;
  const HilbertSpace space(n, 2);
  for (Mode mode : {Mode::A, Mode::B}) {
    const int nm = space.n_max(mode);
    const Eigen::MatrixXcd a = dense(build_annihilation(nm, mode, space));
    const Eigen::MatrixXcd ad = dense(build_creation(nm, mode, space));
    const Eigen::MatrixXcd num = ad * a;
    EXPECT_LT((num - dense(build_number(mode, space))).norm(), 1e-13);
    for (Index i = 0; i < space.dim(); ++i) {
      const auto l = space.decode(i);
      const int occ = mode == Mode::A ? l.n_a : l.n_b;
      EXPECT_NEAR(num(i, i).real(), occ, 1e-14);
      // [a, a+] = 1 - (n_max+1)|n_max><n_max|
      const Eigen::MatrixXcd comm = a * ad - ad * a;
      EXPECT_NEAR(comm(i, i).real(), occ == nm ? -nm : 1.0, 1e-13);
    }
    EXPECT_NEAR((num - Eigen::MatrixXcd(num.diagonal().asDiagonal())).norm(), 0.0, 1e-14);
  }
}

TEST(Hilbert, PauliAlgebra) {
  const HilbertSpace space(2, 2);
  const Eigen::MatrixXcd sx = dense(build_pauli(Axis::X, space));
  const Eigen::MatrixXcd sy = dense(build_pauli(Axis::Y, space));
  const Eigen::MatrixXcd sz = dense(build_pauli(Axis::Z, space));
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(space.dim(), space.dim());
  EXPECT_LT((sx * sx - id).norm(), 1e-14);
  EXPECT_LT((sy * sy - id).norm(), 1e-14);
  EXPECT_LT((sz * sz - id).norm(), 1e-14);
  EXPECT_LT((sx * sy - cplx(0, 1) * sz).norm(), 1e-14);
  const QuantumState down = basis_state({Spin::Down, 0, 0}, space);
  EXPECT_LT((sz * down + down).norm(), 1e-15);
}

TEST(Hilbert, ParityOperatorAndSectors) {
  const HilbertSpace space(1, 1);
  const Eigen::MatrixXcd pi = dense(build_parity(space));
  EXPECT_NEAR(pi(space.encode({Spin::Down, 0, 0}), space.encode({Spin::Down, 0, 0})).real(), 1.0, 0.0);
  EXPECT_NEAR(pi(space.encode({Spin::Up, 0, 0}), space.encode({Spin::Up, 0, 0})).real(), -1.0, 0.0);
  EXPECT_LT((pi * pi - Eigen::MatrixXcd::Identity(8, 8)).norm(), 1e-15);

  // hand enumeration of the 8 labels: even = d00, d11, u01, u10
  const auto sec = parity_sectors(space);
  ASSERT_EQ(sec.even.size(), 4u);
  ASSERT_EQ(sec.odd.size(), 4u);
  std::vector<Index> even_expected{space.encode({Spin::Down, 0, 0}), space.encode({Spin::Down, 1, 1}),
                                   space.encode({Spin::Up, 0, 1}), space.encode({Spin::Up, 1, 0})};
  std::sort(even_expected.begin(), even_expected.end());
  EXPECT_EQ(sec.even, even_expected);

  const HilbertSpace big(10, 12);
  const auto s2 = parity_sectors(big);
  EXPECT_EQ(static_cast<Index>(s2.even.size() + s2.odd.size()), big.dim());
  const Index i = big.encode({Spin::Down, 5, 10});
  EXPECT_NE(std::find(s2.odd.begin(), s2.odd.end(), i), s2.odd.end());
}

TEST(Hilbert, ParityMatchesExponentOfExcitationNumber) {
  for (int n = 1; n <= 10; ++n) {
    const HilbertSpace space(n, n);
    const auto pi = build_parity(space);
    const Eigen::MatrixXcd na = dense(build_number(Mode::A, space));
    const Eigen::MatrixXcd nb = dense(build_number(Mode::B, space));
    const Eigen::MatrixXcd sz = dense(build_pauli(Axis::Z, space));
    for (Index i = 0; i < space.dim(); ++i) {
      const double total = (na(i, i) + nb(i, i)).real() + 0.5 * (1.0 + sz(i, i).real());
      EXPECT_NEAR(pi.entries.coeff(i, i).real(), std::cos(std::numbers::pi * total), 1e-12);
    }
  }
}

TEST(Hilbert, TruncationLocality) {
  const HilbertSpace small(3, 3), large(6, 6);
  for (Mode mode : {Mode::A, Mode::B}) {
    const Eigen::MatrixXcd as = dense(build_annihilation(3, mode, small));
    const Eigen::MatrixXcd al = dense(build_annihilation(6, mode, large));
    for (Index i = 0; i < small.dim(); ++i)
      for (Index j = 0; j < small.dim(); ++j) {
        const auto li = small.decode(i), lj = small.decode(j);
        if (li.n_a >= 3 || li.n_b >= 3 || lj.n_a >= 3 || lj.n_b >= 3) continue;
        EXPECT_EQ(as(i, j), al(large.encode(li), large.encode(lj)));
      }
  }
}

}  // namespace
