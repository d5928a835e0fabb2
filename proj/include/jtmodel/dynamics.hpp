#pragma once

/*
 * Unitary dynamics by spectral resolution,
 *   |Psi(t)> = sum_mu a_mu exp(-i E_mu t) |psi_mu>,
 * observable traces, distance to the diagonal ensemble, and the second-order
 * Renyi entropy of the spin, S_R = -ln Tr(rho_S^2).
 *
 * Times are in units of 1/energy (hbar = 1). Evolution is evaluated in time
 * batches: per parity block, Psi_b(t_1..t_k) = V_b C with C_jk = a_j e^{-i E_j t_k},
 * restricted to eigenvectors with non-negligible overlap.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "jtmodel/ensembles.hpp"

namespace jt {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string observable;
  Fingerprint fingerprint = 0;
};

struct TimeGrid {
  double t_max = 0.0;
  Index points = 2000;

  std::vector<double> times() const {
    if (points < 2 || !(t_max > 0.0)) throw ConfigError("TimeGrid: need t_max > 0 and at least 2 points");
    std::vector<double> t(static_cast<std::size_t>(points));
    for (Index k = 0; k < points; ++k) t[static_cast<std::size_t>(k)] = t_max * double(k) / double(points - 1);
    return t;
  }
};

// 2000 points over [0, 100 * 2 pi / min(w_a, w_b)].
inline TimeGrid default_time_grid(const ModelParams& p) {
  return {100.0 * 2.0 * std::numbers::pi / std::min(p.omega_a, p.omega_b), 2000};
}

inline void require_increasing(const std::vector<double>& times) {
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ConfigError("time grid must be strictly increasing");
}

namespace detail {

inline constexpr Index kTimeBatch = 64;

template <class Scalar>
class Propagator {
 public:
  using Matrix = typename Spectrum<Scalar>::Matrix;

  Propagator(const InitialState& st, const Spectrum<Scalar>& spec) : dim_(spec.dim()) {
    if (st.coeffs.size() != spec.size()) throw ConfigError("InitialState does not belong to this spectrum");
    for (std::size_t b = 0; b < spec.blocks().size(); ++b) {
      const auto& blk = spec.blocks()[b];
      std::vector<Index> cols;
      for (Index j = 0; j < blk.energies.size(); ++j)
        if (std::abs(st.coeffs(spec.global_index(static_cast<int>(b), j))) > kActiveAmplitudeCutoff) cols.push_back(j);
      if (cols.empty()) continue;
      Part part;
      part.basis = &blk.basis;
      part.vectors.resize(blk.vectors.rows(), static_cast<Index>(cols.size()));
      part.amplitudes.resize(static_cast<Index>(cols.size()));
      part.energies.resize(static_cast<Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto kk = static_cast<Index>(k);
        part.vectors.col(kk) = blk.vectors.col(cols[k]);
        part.amplitudes(kk) = st.coeffs(spec.global_index(static_cast<int>(b), cols[k]));
        part.energies(kk) = blk.energies(cols[k]);
      }
      parts_.push_back(std::move(part));
    }
  }

  // Columns are Psi(t_k) for the given times.
  Eigen::MatrixXcd states(const double* t, Index count) const {
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(dim_, count);
    for (const auto& part : parts_) {
      Eigen::MatrixXcd c(part.energies.size(), count);
      for (Index k = 0; k < count; ++k)
        for (Index j = 0; j < part.energies.size(); ++j)
          c(j, k) = part.amplitudes(j) * std::polar(1.0, -part.energies(j) * t[k]);
      const Eigen::MatrixXcd local = times<Scalar>(part.vectors, c);
      for (std::size_t r = 0; r < part.basis->size(); ++r) psi.row((*part.basis)[r]) = local.row(static_cast<Index>(r));
    }
    return psi;
  }

  // visit(k, Psi(t_k)) for every time, in order.
  template <class Visit>
  void for_each(const std::vector<double>& times, Visit&& visit) const {
    const auto n = static_cast<Index>(times.size());
    for (Index k0 = 0; k0 < n; k0 += kTimeBatch) {
      const Index count = std::min(kTimeBatch, n - k0);
      const Eigen::MatrixXcd psi = states(times.data() + k0, count);
      for (Index k = 0; k < count; ++k) visit(static_cast<std::size_t>(k0 + k), psi.col(k));
    }
  }

 private:
  struct Part {
    const std::vector<Index>* basis = nullptr;
    Matrix vectors;
    Eigen::VectorXcd amplitudes;
    Eigen::VectorXd energies;
  };
  Index dim_;
  std::vector<Part> parts_;
};

template <class Column>
double expectation_value(const ObservableSpec& obs, const Column& psi) {
  if (obs.diagonal) return obs.diagonal->dot(psi.cwiseAbs2());
  const Eigen::VectorXcd v = psi;
  const cplx e = v.dot(obs.matrix.entries * v);
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
    throw NumericalError("observable expectation has imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

}  // namespace detail

template <class Scalar>
QuantumState evolve(const InitialState& st, const Spectrum<Scalar>& spec, double t) {
  return detail::Propagator<Scalar>(st, spec).states(&t, 1).col(0);
}

template <class Scalar>
TimeSeries observable_series(const InitialState& st, const ObservableSpec& obs, const Spectrum<Scalar>& spec,
                             const std::vector<double>& times) {
  require_increasing(times);
  if (obs.matrix.dim() != spec.dim()) throw ConfigError("observable_series: observable dimension mismatch");
  TimeSeries ts{times, std::vector<double>(times.size()), to_string(obs.kind), spec.fingerprint()};
  detail::Propagator<Scalar>(st, spec).for_each(times, [&](std::size_t k, const auto& psi) {
    ts.values[k] = detail::expectation_value(obs, psi);
  });
  return ts;
}

template <class Scalar>
TimeSeries distance_to_de(const InitialState& st, const ObservableSpec& obs, const Spectrum<Scalar>& spec,
                          const std::vector<double>& times) {
  TimeSeries ts = observable_series(st, obs, spec, times);
  const double de = diagonal_average(st, obs, spec).value;
  for (double& v : ts.values) v = std::abs(v - de);
  ts.observable = "distance_to_de(" + ts.observable + ")";
  return ts;
}

// Tr(rho_S^2) for the spin reduced state; the spin index is the slowest one.
template <class Column>
double spin_purity(const Column& psi, Index fock_dim) {
  const auto down = psi.head(fock_dim);
  const auto up = psi.tail(fock_dim);
  const double pdd = down.squaredNorm();
  const double puu = up.squaredNorm();
  const cplx pdu = up.dot(down);
  return pdd * pdd + puu * puu + 2.0 * std::norm(pdu);
}

template <class Scalar>
TimeSeries renyi_entropy_series(const InitialState& st, const Spectrum<Scalar>& spec,
                                const std::vector<double>& times) {
  require_increasing(times);
  const Index f = spec.space().fock_dim();
  TimeSeries ts{times, std::vector<double>(times.size()), "renyi2_spin", spec.fingerprint()};
  detail::Propagator<Scalar>(st, spec).for_each(times, [&](std::size_t k, const auto& psi) {
    ts.values[k] = -std::log(spin_purity(psi, f));
  });
  return ts;
}

// Trapezoidal time average (1/(t_end - t_0)) * integral of the series.
inline double cesaro_mean(const TimeSeries& ts) {
  if (ts.times.size() < 2) throw ConfigError("cesaro_mean: need at least two samples");
  double acc = 0.0;
  for (std::size_t k = 1; k < ts.times.size(); ++k)
    acc += 0.5 * (ts.values[k] + ts.values[k - 1]) * (ts.times[k] - ts.times[k - 1]);
  return acc / (ts.times.back() - ts.times.front());
}

struct LongTimeAverage {
  double value = 0.0;
  double tau = 0.0;
  int doublings = 0;
  bool converged = false;
};

// Cesaro mean over [0, tau], doubling tau (same step) until the mean moves by
// less than `tolerance`.
template <class Scalar>
LongTimeAverage long_time_average(const InitialState& st, const ObservableSpec& obs, const Spectrum<Scalar>& spec,
                                  const TimeGrid& grid, double tolerance = 1e-3, int max_doublings = 6) {
  TimeSeries ts = observable_series(st, obs, spec, grid.times());
  LongTimeAverage r{cesaro_mean(ts), grid.t_max, 0, false};
  const double dt = grid.t_max / double(grid.points - 1);
  const detail::Propagator<Scalar> prop(st, spec);
  while (r.doublings < max_doublings) {
    const std::size_t n_old = ts.times.size();
    std::vector<double> extra;
    for (std::size_t k = n_old; k < 2 * n_old - 1; ++k) extra.push_back(dt * double(k));
    prop.for_each(extra, [&](std::size_t, const auto& psi) { ts.values.push_back(detail::expectation_value(obs, psi)); });
    ts.times.insert(ts.times.end(), extra.begin(), extra.end());
    const double next = cesaro_mean(ts);
    ++r.doublings;
    r.tau = ts.times.back();
    const double change = std::abs(next - r.value);
    r.value = next;
    if (change < tolerance) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace jt
