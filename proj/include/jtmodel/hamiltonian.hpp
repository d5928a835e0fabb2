#pragma once

/*
 * Jahn-Teller spin-two-boson Hamiltonian
 *
 *   H = w_a a+a + w_b b+b + (Delta/2) sz + g_a sx (a+ + a) + g_b sy (b+ + b)
 *
 * in the truncated basis of hilbert.hpp, the non-interacting part H0, and the
 * parameter conversions used by the run configurations.
 *
 * Real gauge: conjugating with G = diag(i^{n_b}) maps b -> i b, so the b
 * coupling becomes g_b (i sy)(b - b+), which is real symmetric. Spectra of the
 * two gauges coincide; eigenvectors are related by v_complex = G v_real.
 */

#include <cmath>
#include <string>

#include "jtmodel/hilbert.hpp"

namespace jt {

enum class Gauge { Complex, Real };

inline const char* to_string(Gauge g) { return g == Gauge::Real ? "real" : "complex"; }

struct ModelParams {
  double omega_a = 1.0;
  double omega_b = 1.0;
  double delta = 1.0;
  double g_a = 0.0;
  double g_b = 0.0;
  int n_max_a = 1;
  int n_max_b = 1;

  void validate() const {
    if (!(omega_a > 0.0) || !(omega_b > 0.0) || !(delta > 0.0)) {
      throw ConfigError("ModelParams: omega_a, omega_b and delta must be positive");
    }
    if (!(g_a >= 0.0) || !(g_b >= 0.0)) throw ConfigError("ModelParams: couplings must be non-negative");
    if (n_max_a < 1 || n_max_b < 1) throw ConfigError("ModelParams: truncations must be >= 1");
  }

  HilbertSpace space() const { return HilbertSpace(n_max_a, n_max_b); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct PhysicalParams {
  double mass = 1.0;
  double mu_a = 0.0;
  double mu_b = 0.0;
  double omega_a = 1.0;
  double omega_b = 1.0;
  double delta = 1.0;
};

struct DimensionlessParams {
  double lambda_a;
  double lambda_b;
  double eta_a;
  double eta_b;
};

// Position scale r0 = 1/sqrt(2 m w) of one oscillator.
inline double position_scale(double mass, double omega) { return 1.0 / std::sqrt(2.0 * mass * omega); }
inline double momentum_scale(double mass, double omega) { return std::sqrt(mass * omega / 2.0); }

// g_i = mu_i r0_i. The constant term of the position/momentum form is dropped.
inline ModelParams couplings_from_physical(const PhysicalParams& p, int n_max_a, int n_max_b) {
  if (!(p.mass > 0.0) || !(p.omega_a > 0.0) || !(p.omega_b > 0.0) || !(p.delta > 0.0)) {
    throw DomainError("couplings_from_physical: mass, frequencies and delta must be positive");
  }
  if (!(p.mu_a >= 0.0) || !(p.mu_b >= 0.0)) throw DomainError("couplings_from_physical: mu must be >= 0");
  ModelParams m;
  m.omega_a = p.omega_a;
  m.omega_b = p.omega_b;
  m.delta = p.delta;
  m.g_a = p.mu_a * position_scale(p.mass, p.omega_a);
  m.g_b = p.mu_b * position_scale(p.mass, p.omega_b);
  m.n_max_a = n_max_a;
  m.n_max_b = n_max_b;
  return m;
}

inline DimensionlessParams dimensionless(const ModelParams& p) {
  return {2.0 * p.g_a / std::sqrt(p.omega_a * p.delta), 2.0 * p.g_b / std::sqrt(p.omega_b * p.delta),
          p.delta / p.omega_a, p.delta / p.omega_b};
}

// Critical coupling g_c = sqrt(Delta w)/2, i.e. lambda = 1.
inline double critical_coupling(double omega, double delta) { return std::sqrt(delta * omega) / 2.0; }

// Inverse of dimensionless() with the energy scale fixed by omega_a.
inline ModelParams from_dimensionless(const DimensionlessParams& d, int n_max_a, int n_max_b,
                                      double omega_a = 1.0) {
  ModelParams m;
  m.omega_a = omega_a;
  m.delta = d.eta_a * omega_a;
  m.omega_b = m.delta / d.eta_b;
  m.g_a = d.lambda_a * critical_coupling(m.omega_a, m.delta);
  m.g_b = d.lambda_b * critical_coupling(m.omega_b, m.delta);
  m.n_max_a = n_max_a;
  m.n_max_b = n_max_b;
  m.validate();
  return m;
}

namespace detail {

// Off-diagonal part shared by both gauges; `term` assembles into the column of `l`.
template <class Emit>
void emit_jt_column(const ModelParams& p, Gauge gauge, const BasisLabel& l, Emit& emit) {
  const bool up = l.spin == Spin::Up;
  const double sz = up ? 1.0 : -1.0;
  emit(l, cplx(p.omega_a * l.n_a + p.omega_b * l.n_b + 0.5 * p.delta * sz));

  BasisLabel f = l;
  f.spin = up ? Spin::Down : Spin::Up;

  // g_a sx (a + a+)
  if (l.n_a > 0) {
    BasisLabel r = f;
    r.n_a -= 1;
    emit(r, cplx(p.g_a * std::sqrt(double(l.n_a))));
  }
  {
    BasisLabel r = f;
    r.n_a += 1;
    emit(r, cplx(p.g_a * std::sqrt(double(l.n_a + 1))));
  }

  // complex: g_b sy (b + b+);   real: g_b (i sy)(b - b+)
  // sy|up> = i|down>, sy|down> = -i|up>;  (i sy)|up> = -|down>, (i sy)|down> = |up>
  const cplx spin_factor = gauge == Gauge::Complex ? (up ? cplx(0.0, 1.0) : cplx(0.0, -1.0))
                                                   : (up ? cplx(-1.0) : cplx(1.0));
  const double raise_sign = gauge == Gauge::Complex ? 1.0 : -1.0;
  if (l.n_b > 0) {
    BasisLabel r = f;
    r.n_b -= 1;
    emit(r, p.g_b * std::sqrt(double(l.n_b)) * spin_factor);
  }
  {
    BasisLabel r = f;
    r.n_b += 1;
    emit(r, raise_sign * p.g_b * std::sqrt(double(l.n_b + 1)) * spin_factor);
  }
}

inline void require_match(const ModelParams& p, const HilbertSpace& space, const char* who) {
  if (p.n_max_a != space.n_max_a() || p.n_max_b != space.n_max_b()) {
    throw ConfigError(std::string(who) + ": parameter truncation (" + std::to_string(p.n_max_a) + ", " +
                      std::to_string(p.n_max_b) + ") does not match space (" + std::to_string(space.n_max_a()) +
                      ", " + std::to_string(space.n_max_b()) + ")");
  }
}

}  // namespace detail

inline OperatorMatrix build_h_jt(const ModelParams& params, const HilbertSpace& space,
                                 Gauge gauge = Gauge::Complex) {
  params.validate();
  detail::require_match(params, space, "build_h_jt");
  auto m = detail::assemble(space, [&](const BasisLabel& l, auto emit) {
    detail::emit_jt_column(params, gauge, l, emit);
  });
  return {std::move(m), true};
}

// H0 = w_a n_a + w_b n_b + (Delta/2) sz, diagonal in the product basis.
inline double h0_energy(const ModelParams& p, const BasisLabel& l) {
  return p.omega_a * l.n_a + p.omega_b * l.n_b + 0.5 * p.delta * (l.spin == Spin::Up ? 1.0 : -1.0);
}

inline OperatorMatrix build_h0(const ModelParams& params, const HilbertSpace& space) {
  detail::require_match(params, space, "build_h0");
  auto m = detail::assemble(space, [&](const BasisLabel& l, auto emit) { emit(l, h0_energy(params, l)); });
  return {std::move(m), true};
}

// Phase i^{n_b} carried by basis state |s, n_a, n_b> under the gauge map.
inline cplx gauge_phase(int n_b) {
  switch (n_b % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline QuantumState to_complex_gauge(const QuantumState& real_gauge_state, const HilbertSpace& space) {
  QuantumState out(real_gauge_state.size());
  for (Index i = 0; i < out.size(); ++i) out(i) = gauge_phase(space.decode(i).n_b) * real_gauge_state(i);
  return out;
}

inline QuantumState to_real_gauge(const QuantumState& complex_gauge_state, const HilbertSpace& space) {
  QuantumState out(complex_gauge_state.size());
  for (Index i = 0; i < out.size(); ++i)
    out(i) = std::conj(gauge_phase(space.decode(i).n_b)) * complex_gauge_state(i);
  return out;
}

}  // namespace jt
