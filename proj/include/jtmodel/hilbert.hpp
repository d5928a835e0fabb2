#pragma once

/*
 * Composite basis {|s>|n_a, n_b>} of one spin-1/2 and two truncated bosonic
 * modes, together with the elementary operators acting on it.
 *
 * Flat index layout:
 *
 *   index = s * (n_max_a + 1)(n_max_b + 1) + n_a * (n_max_b + 1) + n_b,
 *   s = 0 for |down>, s = 1 for |up>.
 *
 * The two spin components of a state vector are therefore contiguous halves,
 * which turns the partial trace over both modes into a pair of dot products.
 */

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "jtmodel/errors.hpp"

namespace jt {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using QuantumState = Eigen::VectorXcd;

enum class Spin : int { Down = 0, Up = 1 };
enum class Mode { A, B };
enum class Axis { X, Y, Z };

struct BasisLabel {
  Spin spin = Spin::Down;
  int n_a = 0;
  int n_b = 0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

inline std::string to_string(const BasisLabel& l) {
  return std::string(l.spin == Spin::Up ? "up" : "down") + "," + std::to_string(l.n_a) + "," +
         std::to_string(l.n_b);
}

// Parity eigenvalue (-1)^(n_a + n_b + [s == up]) of a basis state.
inline int parity_of(const BasisLabel& l) {
  const int excitations = l.n_a + l.n_b + (l.spin == Spin::Up ? 1 : 0);
  return excitations % 2 == 0 ? +1 : -1;
}

class HilbertSpace {
 public:
  HilbertSpace(int n_max_a, int n_max_b) : n_max_a_(n_max_a), n_max_b_(n_max_b) {
    if (n_max_a < 1 || n_max_b < 1) {
      throw ConfigError("HilbertSpace: Fock truncations must be >= 1, got " +
                        std::to_string(n_max_a) + ", " + std::to_string(n_max_b));
    }
  }

  int n_max_a() const noexcept { return n_max_a_; }
  int n_max_b() const noexcept { return n_max_b_; }
  int n_max(Mode m) const noexcept { return m == Mode::A ? n_max_a_ : n_max_b_; }

  Index fock_dim() const noexcept { return Index(n_max_a_ + 1) * (n_max_b_ + 1); }
  Index dim() const noexcept { return 2 * fock_dim(); }

  bool contains(const BasisLabel& l) const noexcept {
    return l.n_a >= 0 && l.n_a <= n_max_a_ && l.n_b >= 0 && l.n_b <= n_max_b_;
  }

  Index encode(const BasisLabel& l) const {
    if (!contains(l)) {
      throw ConfigError("basis label (" + to_string(l) + ") outside truncation (" +
                        std::to_string(n_max_a_) + ", " + std::to_string(n_max_b_) + ")");
    }
    return static_cast<Index>(l.spin) * fock_dim() + Index(l.n_a) * (n_max_b_ + 1) + l.n_b;
  }

  BasisLabel decode(Index i) const {
    if (i < 0 || i >= dim()) throw ConfigError("basis index out of range");
    const Index fock = i % fock_dim();
    return BasisLabel{i < fock_dim() ? Spin::Down : Spin::Up, static_cast<int>(fock / (n_max_b_ + 1)),
                      static_cast<int>(fock % (n_max_b_ + 1))};
  }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  int n_max_a_;
  int n_max_b_;
};

struct OperatorMatrix {
  SparseMatrix entries;
  bool hermitian = false;

  Index dim() const noexcept { return entries.rows(); }
};

inline double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

// max |M - M^dagger| relative to max |M| (0 for the zero matrix).
inline double hermiticity_defect(const SparseMatrix& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  const SparseMatrix diff = m - SparseMatrix(m.adjoint());
  return max_abs(diff) / scale;
}

namespace detail {

// Sparse operator from a per-basis-state action: for every basis column j,
// `action(label_j, emit)` calls emit(row_label, value) for each nonzero.
template <class Action>
SparseMatrix assemble(const HilbertSpace& space, Action&& action) {
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(space.dim()) * 2);
  for (Index j = 0; j < space.dim(); ++j) {
    const BasisLabel col = space.decode(j);
    action(col, [&](const BasisLabel& row, cplx value) {
      if (value != cplx(0.0) && space.contains(row)) triplets.emplace_back(space.encode(row), j, value);
    });
  }
  SparseMatrix m(space.dim(), space.dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

// Truncated annihilation operator of one mode: a|n> = sqrt(n)|n-1>.
inline OperatorMatrix build_annihilation(int n_max, Mode mode, const HilbertSpace& space) {
  if (n_max != space.n_max(mode)) {
    throw ConfigError("build_annihilation: n_max " + std::to_string(n_max) +
                      " does not match space truncation " + std::to_string(space.n_max(mode)));
  }
  auto m = detail::assemble(space, [mode](BasisLabel l, auto emit) {
    int& n = (mode == Mode::A) ? l.n_a : l.n_b;
    if (n == 0) return;
    const double amp = std::sqrt(static_cast<double>(n));
    --n;
    emit(l, amp);
  });
  return {std::move(m), false};
}

inline OperatorMatrix build_creation(int n_max, Mode mode, const HilbertSpace& space) {
  auto a = build_annihilation(n_max, mode, space);
  return {SparseMatrix(a.entries.adjoint()), false};
}

inline OperatorMatrix build_number(Mode mode, const HilbertSpace& space) {
  auto m = detail::assemble(space, [mode](const BasisLabel& l, auto emit) {
    emit(l, static_cast<double>(mode == Mode::A ? l.n_a : l.n_b));
  });
  return {std::move(m), true};
}

// Pauli matrix on the spin factor; sigma_z|up> = +|up>.
inline OperatorMatrix build_pauli(Axis axis, const HilbertSpace& space) {
  auto m = detail::assemble(space, [axis](const BasisLabel& l, auto emit) {
    const bool up = l.spin == Spin::Up;
    BasisLabel flipped = l;
    flipped.spin = up ? Spin::Down : Spin::Up;
    switch (axis) {
      case Axis::X:
        emit(flipped, 1.0);
        break;
      case Axis::Y:
        // sigma_y|up> = i|down>, sigma_y|down> = -i|up>
        emit(flipped, up ? cplx(0.0, 1.0) : cplx(0.0, -1.0));
        break;
      case Axis::Z:
        emit(l, up ? 1.0 : -1.0);
        break;
    }
  });
  return {std::move(m), true};
}

// |s><s| on the spin factor.
inline OperatorMatrix build_spin_projector(Spin s, const HilbertSpace& space) {
  auto m = detail::assemble(space, [s](const BasisLabel& l, auto emit) {
    if (l.spin == s) emit(l, 1.0);
  });
  return {std::move(m), true};
}

inline OperatorMatrix build_identity(const HilbertSpace& space) {
  auto m = detail::assemble(space, [](const BasisLabel& l, auto emit) { emit(l, 1.0); });
  return {std::move(m), true};
}

// Pi = exp(i pi (n_a + n_b + (1 + sigma_z)/2)), diagonal with entries +-1.
inline OperatorMatrix build_parity(const HilbertSpace& space) {
  auto m = detail::assemble(space, [](const BasisLabel& l, auto emit) { emit(l, double(parity_of(l))); });
  return {std::move(m), true};
}

struct ParitySectors {
  std::vector<Index> even;
  std::vector<Index> odd;
};

inline ParitySectors parity_sectors(const HilbertSpace& space) {
  ParitySectors s;
  s.even.reserve(static_cast<std::size_t>(space.fock_dim()));
  s.odd.reserve(static_cast<std::size_t>(space.fock_dim()));
  for (Index i = 0; i < space.dim(); ++i) (parity_of(space.decode(i)) > 0 ? s.even : s.odd).push_back(i);
  return s;
}

inline QuantumState basis_state(const BasisLabel& l, const HilbertSpace& space) {
  QuantumState v = QuantumState::Zero(space.dim());
  v(space.encode(l)) = 1.0;
  return v;
}

}  // namespace jt
