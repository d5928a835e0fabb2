#pragma once

/*
 * Statistical ensembles over the eigenbasis of H_JT.
 *
 *   |Psi0> = sum_mu a_mu |psi_mu>,            E0 = sum_mu |a_mu|^2 E_mu
 *   diagonal ensemble     <O>_DE   = sum_mu |a_mu|^2 O_mumu
 *   microcanonical        <O>_ME   = mean of O_mumu over |E_mu - E0| < dE
 *   EEV deviation         D^mic    = sum_shell |O_mumu - <O>_ME| / sum_shell O_mumu
 *   time fluctuations     delta^2  = sum_{mu != nu} |a_mu|^2 |a_nu|^2 |O_munu|^2
 *   effective dimension   d_eff    = 1 / sum_mu |a_mu|^4
 *
 * The DE and fluctuation formulas assume a non-degenerate spectrum (and
 * non-degenerate gaps); DiagonalAverage::approximate flags spectra where
 * degenerate pairs carry weight.
 */

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jtmodel/spectral.hpp"

namespace jt {

inline constexpr double kNormalizationTolerance = 1e-8;
inline constexpr double kDegenerateWeightThreshold = 1e-6;
// Eigen-coefficients with |a_mu| below this are dropped from weighted sums.
inline constexpr double kActiveAmplitudeCutoff = 1e-15;

struct InitialState {
  std::optional<BasisLabel> label;
  QuantumState vector;       // full-space amplitudes in the spectrum's gauge
  double energy_e0 = 0.0;
  Eigen::VectorXcd coeffs;   // a_mu, indexed by global eigenindex
  std::vector<std::string> warnings;

  Eigen::VectorXd weights() const { return coeffs.cwiseAbs2(); }
};

enum class ObservableKind { SpinProjectorDown, SigmaZ, Identity, Custom };

inline const char* to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::SpinProjectorDown: return "spin_projector_down";
    case ObservableKind::SigmaZ: return "sigma_z";
    case ObservableKind::Identity: return "identity";
    case ObservableKind::Custom: return "custom";
  }
  return "?";
}

struct ObservableSpec {
  ObservableKind kind = ObservableKind::Custom;
  OperatorMatrix matrix;
  // Set when the operator is diagonal in the product basis (P, sz, n_i, ...).
  std::optional<Eigen::VectorXd> diagonal;

  static ObservableSpec make(ObservableKind kind, const HilbertSpace& space) {
    switch (kind) {
      case ObservableKind::SpinProjectorDown: return from_diagonal(kind, build_spin_projector(Spin::Down, space));
      case ObservableKind::SigmaZ: return from_diagonal(kind, build_pauli(Axis::Z, space));
      case ObservableKind::Identity: return from_diagonal(kind, build_identity(space));
      case ObservableKind::Custom: break;
    }
    throw ConfigError("ObservableSpec::make: custom observables need a matrix");
  }

  // Any Hermitian operator; must be expressed in the gauge of the spectrum it is used with.
  static ObservableSpec custom(OperatorMatrix m) {
    if (hermiticity_defect(m.entries) > 1e-12) throw DomainError("ObservableSpec: observable must be Hermitian");
    m.hermitian = true;
    bool is_diag = true;
    for (Index c = 0; c < m.entries.outerSize() && is_diag; ++c)
      for (SparseMatrix::InnerIterator it(m.entries, c); it; ++it)
        if (it.row() != it.col() && it.value() != cplx(0.0)) {
          is_diag = false;
          break;
        }
    if (is_diag) return from_diagonal(ObservableKind::Custom, std::move(m));
    return ObservableSpec{ObservableKind::Custom, std::move(m), std::nullopt};
  }

 private:
  static ObservableSpec from_diagonal(ObservableKind kind, OperatorMatrix m) {
    Eigen::VectorXd d = m.entries.diagonal().real();
    return ObservableSpec{kind, std::move(m), std::move(d)};
  }
};

namespace detail {

// y = V^dagger x for a real or complex eigenvector block and complex x.
template <class Scalar>
Eigen::VectorXcd adjoint_times(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, const Eigen::VectorXcd& x) {
  if constexpr (is_complex_v<Scalar>) {
    return v.adjoint() * x;
  } else {
    const Eigen::VectorXd re = v.transpose() * x.real();
    const Eigen::VectorXd im = v.transpose() * x.imag();
    Eigen::VectorXcd out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }
}

// Y = V C for a real or complex block V and complex C.
template <class Scalar, class Derived>
Eigen::MatrixXcd times(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, const Eigen::MatrixBase<Derived>& c) {
  if constexpr (is_complex_v<Scalar>) {
    return v * c;
  } else {
    const Eigen::MatrixXd re = v * c.real();
    const Eigen::MatrixXd im = v * c.imag();
    Eigen::MatrixXcd out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }
}

template <class Vec>
Vec gather(const Vec& full, const std::vector<Index>& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = full(idx[k]);
  return out;
}

}  // namespace detail

// a_mu = <psi_mu|Psi0>. `psi0` is read in the spectrum's gauge; an
// unnormalized vector is normalized and a warning recorded.
template <class Scalar>
InitialState expand_initial(const QuantumState& psi0, const Spectrum<Scalar>& spec) {
  if (psi0.size() != spec.dim()) throw ConfigError("expand_initial: state dimension does not match the spectrum");
  InitialState st;
  st.vector = psi0;
  const double norm = psi0.norm();
  if (!(norm > 0.0)) throw DomainError("expand_initial: zero state vector");
  if (std::abs(norm - 1.0) > kNormalizationTolerance) {
    st.warnings.push_back("expand_initial: input norm " + std::to_string(norm) + " renormalized to 1");
  }
  st.vector /= norm;

  st.coeffs = Eigen::VectorXcd::Zero(spec.size());
  for (int b = 0; b < static_cast<int>(spec.blocks().size()); ++b) {
    const auto& blk = spec.blocks()[static_cast<std::size_t>(b)];
    const Eigen::VectorXcd local = detail::adjoint_times<Scalar>(blk.vectors, detail::gather(st.vector, blk.basis));
    for (Index j = 0; j < local.size(); ++j) st.coeffs(spec.global_index(b, j)) = local(j);
  }
  const double captured = st.coeffs.squaredNorm();
  if (std::abs(captured - 1.0) > 1e-10) {
    throw DomainError("expand_initial: state has weight " + std::to_string(1.0 - captured) +
                      " outside the diagonalized sector(s)");
  }
  st.energy_e0 = st.weights().dot(spec.energies());
  return st;
}

// Product-state label |s, n_a, n_b>. In the real gauge the product state
// differs from its complex-gauge counterpart by a global phase only.
template <class Scalar>
InitialState expand_initial(const BasisLabel& label, const Spectrum<Scalar>& spec) {
  InitialState st = expand_initial(basis_state(label, spec.space()), spec);
  st.label = label;
  return st;
}

// Sum of 2|a_mu||a_nu| over flagged degenerate pairs.
template <class Scalar>
double degenerate_weight(const InitialState& st, const Spectrum<Scalar>& spec) {
  double w = 0.0;
  for (const auto& [m, n] : spec.degenerate_pairs()) w += 2.0 * std::abs(st.coeffs(m)) * std::abs(st.coeffs(n));
  return w;
}

// O_mumu for the requested eigenindices (all of them when `mus` is empty).
template <class Scalar>
Eigen::VectorXd eev(const ObservableSpec& obs, const Spectrum<Scalar>& spec, std::span<const Index> mus = {}) {
  if (obs.matrix.dim() != spec.dim()) throw ConfigError("eev: observable dimension does not match the spectrum");
  std::vector<Index> all;
  if (mus.empty()) {
    all.resize(static_cast<std::size_t>(spec.size()));
    std::iota(all.begin(), all.end(), Index{0});
    mus = all;
  }
  Eigen::VectorXd out(static_cast<Index>(mus.size()));
  // Group requested columns per block.
  std::vector<std::vector<std::pair<Index, Index>>> per_block(spec.blocks().size());
  for (std::size_t k = 0; k < mus.size(); ++k) {
    const auto& s = spec.slot(mus[k]);
    per_block[static_cast<std::size_t>(s.block)].emplace_back(s.column, static_cast<Index>(k));
  }
  for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
    if (per_block[b].empty()) continue;
    const auto& blk = spec.blocks()[b];
    if (obs.diagonal) {
      const Eigen::VectorXd d = detail::gather(*obs.diagonal, blk.basis);
      for (const auto& [col, k] : per_block[b]) out(k) = d.dot(blk.vectors.col(col).cwiseAbs2());
    } else {
      const SparseMatrix ob = detail::sparse_block<Scalar>(obs.matrix.entries, blk.basis);
      for (const auto& [col, k] : per_block[b]) {
        const Eigen::VectorXcd v = blk.vectors.col(col).template cast<cplx>();
        out(k) = v.dot(ob * v).real();
      }
    }
  }
  return out;
}

struct DiagonalAverage {
  double value = 0.0;
  bool approximate = false;  // degenerate pairs carry weight > 1e-6
};

template <class Scalar>
DiagonalAverage diagonal_average(const InitialState& st, const ObservableSpec& obs, const Spectrum<Scalar>& spec) {
  const Eigen::VectorXd w = st.weights();
  std::vector<Index> active;
  for (Index mu = 0; mu < w.size(); ++mu)
    if (std::abs(st.coeffs(mu)) > kActiveAmplitudeCutoff) active.push_back(mu);
  const Eigen::VectorXd o = eev(obs, spec, active);
  DiagonalAverage r;
  for (std::size_t k = 0; k < active.size(); ++k) r.value += w(active[k]) * o(static_cast<Index>(k));
  r.approximate = degenerate_weight(st, spec) > kDegenerateWeightThreshold;
  return r;
}

// dE = p (E0 - E_G).
template <class Scalar>
double shell_half_width(const InitialState& st, const Spectrum<Scalar>& spec, double p) {
  if (!(p > 0.0)) throw ConfigError("shell fraction must be positive");
  return p * (st.energy_e0 - spec.energy(0));
}

template <class Scalar>
std::vector<Index> shell_members(const Spectrum<Scalar>& spec, double e0, double half_width) {
  if (!(half_width > 0.0)) throw ConfigError("microcanonical shell half-width must be positive");
  std::vector<Index> in;
  double nearest = std::numeric_limits<double>::infinity();
  for (Index mu = 0; mu < spec.size(); ++mu) {
    const double dist = std::abs(spec.energy(mu) - e0);
    nearest = std::min(nearest, dist);
    if (dist < half_width) in.push_back(mu);
  }
  if (in.empty()) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "microcanonical shell |E - %.10g| < %.3g is empty; nearest eigenvalue at distance %.3g",
                  e0, half_width, nearest);
    throw EmptyShellError(msg, nearest);
  }
  return in;
}

struct MicrocanonicalAverage {
  double value = 0.0;
  Index count = 0;
};

template <class Scalar>
MicrocanonicalAverage microcanonical_average(const ObservableSpec& obs, const Spectrum<Scalar>& spec, double e0,
                                             double half_width) {
  const auto members = shell_members(spec, e0, half_width);
  const Eigen::VectorXd o = eev(obs, spec, members);
  return {o.mean(), static_cast<Index>(members.size())};
}

template <class Scalar>
double eev_deviation(const ObservableSpec& obs, const Spectrum<Scalar>& spec, double e0, double half_width) {
  const auto members = shell_members(spec, e0, half_width);
  const Eigen::VectorXd o = eev(obs, spec, members);
  const double denom = o.sum();
  if (denom == 0.0) throw DomainError("eev_deviation: sum of O_mumu over the shell is zero");
  return (o.array() - o.mean()).abs().sum() / denom;
}

// sum_{mu != nu} w_mu w_nu |O_munu|^2 via G = X^dagger O X with X the
// sqrt(w)-weighted active eigenvectors; never forms the full O_munu.
template <class Scalar>
double time_fluctuations(const InitialState& st, const ObservableSpec& obs, const Spectrum<Scalar>& spec) {
  using Matrix = typename Spectrum<Scalar>::Matrix;
  const Eigen::VectorXd w = st.weights();

  std::vector<std::vector<Index>> active(spec.blocks().size());
  for (Index mu = 0; mu < w.size(); ++mu) {
    if (std::abs(st.coeffs(mu)) <= kActiveAmplitudeCutoff) continue;
    const auto& s = spec.slot(mu);
    active[static_cast<std::size_t>(s.block)].push_back(s.column);
  }
  auto weighted = [&](std::size_t b) {
    const auto& blk = spec.blocks()[b];
    Matrix x(blk.vectors.rows(), static_cast<Index>(active[b].size()));
    for (std::size_t k = 0; k < active[b].size(); ++k) {
      const Index col = active[b][k];
      x.col(static_cast<Index>(k)) = blk.vectors.col(col) * std::sqrt(w(spec.global_index(static_cast<int>(b), col)));
    }
    return x;
  };
  auto off_diagonal_mass = [](const auto& g) {
    return g.cwiseAbs2().sum() - g.diagonal().cwiseAbs2().sum();
  };

  if (obs.diagonal) {
    // Diagonal observables preserve parity: blocks decouple.
    double total = 0.0;
    for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
      if (active[b].empty()) continue;
      const Matrix x = weighted(b);
      const Eigen::VectorXd d = detail::gather(*obs.diagonal, spec.blocks()[b].basis);
      const Matrix g = x.adjoint() * (d.asDiagonal() * x);
      total += off_diagonal_mass(g);
    }
    return std::max(0.0, total);
  }

  Index k_total = 0;
  for (const auto& a : active) k_total += static_cast<Index>(a.size());
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(spec.dim(), k_total);
  Index offset = 0;
  for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
    if (active[b].empty()) continue;
    const Matrix xb = weighted(b);
    const auto& basis = spec.blocks()[b].basis;
    for (std::size_t r = 0; r < basis.size(); ++r)
      x.row(basis[r]).segment(offset, xb.cols()) = xb.row(static_cast<Index>(r)).template cast<cplx>();
    offset += xb.cols();
  }
  const Eigen::MatrixXcd y = obs.matrix.entries * x;
  const Eigen::MatrixXcd g = x.adjoint() * y;
  return std::max(0.0, off_diagonal_mass(g));
}

inline double effective_dimension(const InitialState& st) {
  const double s = st.coeffs.cwiseAbs2().cwiseAbs2().sum();
  if (!(s > 0.0)) throw DomainError("effective_dimension: zero coefficient vector");
  return 1.0 / s;
}

}  // namespace jt
