#pragma once

/*
 * Closed-form mean-field theory of the Jahn-Teller model in the limit
 * eta_i = Delta / w_i -> infinity.
 *
 * Normal phase (lambda_a, lambda_b <= 1):
 *   <n_i>/eta_i -> 0, <sz> = -1,
 *   eps_np = w_a sqrt(1 - la^2) + w_b sqrt(1 - lb^2),
 *   E_np   = -(Delta + w_a + w_b)/2 + (w_a/2) sqrt(1 - la^2) + (w_b/2) sqrt(1 - lb^2),
 *   r_i    = -ln(1 - l_i^2)/4.
 *
 * a-super-radiant phase (la > 1, la > lb):
 *   alpha_a^2  = eta_a (la^4 - 1) / (4 la^2),  Omega = sqrt(Delta^2 + 16 alpha_a^2 g_a^2) = Delta la^2,
 *   cos(2 theta) = -Delta / Omega,  <sz> = -1/la^2,
 *   eps_sp = w_a sqrt(1 - la^-4) + w_b sqrt(1 - (lb/la)^2),
 *   E_sp   = Delta (la^4 - 1)/(4 la^2) - Delta la^2/2 - (w_a + w_b)/2
 *            + (w_a/2) sqrt(1 - la^-4) + (w_b/2) sqrt(1 - lb^2/la^2),
 *   r~_a = -ln(1 - la^-4)/4,  r~_b = -ln(1 - lb^2/la^2)/4.
 *
 * The b-super-radiant phase follows by exchanging (w, lambda, eta, mode)
 * between a and b.
 */

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <algorithm>
#include <string>

#include "jtmodel/hamiltonian.hpp"

namespace jt {

enum class Phase { Normal, ASuper, BSuper };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Normal: return "normal";
    case Phase::ASuper: return "a-super-radiant";
    case Phase::BSuper: return "b-super-radiant";
  }
  return "?";
}

struct MeanFieldReport {
  Phase phase = Phase::Normal;
  double sz_mean = -1.0;
  double na_density = 0.0;
  double nb_density = 0.0;
  double gap = 0.0;
  double ground_energy = 0.0;
  double squeeze_a = 0.0;
  double squeeze_b = 0.0;
  double displacement = 0.0;  // alpha of the macroscopically occupied mode
  double spin_angle = 0.0;    // theta of the rotated spin; 0 in the normal phase
  double omega_tilde = 0.0;   // rotated spin splitting; Delta in the normal phase
};

inline Phase classify_phase(double lambda_a, double lambda_b) {
  if (!(lambda_a >= 0.0) || !(lambda_b >= 0.0)) throw DomainError("classify_phase: couplings must be >= 0");
  if (lambda_a <= 1.0 && lambda_b <= 1.0) return Phase::Normal;
  const double scale = std::max(lambda_a, lambda_b);
  if (std::abs(lambda_a - lambda_b) <= 1e-12 * scale) {
    throw DegenerateBoundaryError("classify_phase: lambda_a = lambda_b = " + std::to_string(lambda_a) +
                                  " > 1 lies on the first-order coexistence line");
  }
  return lambda_a > lambda_b ? Phase::ASuper : Phase::BSuper;
}

namespace detail {

inline double checked_sqrt(double x, const char* what) {
  if (x < 0.0) throw ValidityDomainError(std::string(what) + ": negative operand " + std::to_string(x));
  return std::sqrt(x);
}

inline double squeeze_from(double x, const char* what) {
  // -ln(x)/4 for x = 1 - (ratio)^2; x = 0 gives an infinite squeeze at the critical point
  if (x < 0.0) throw ValidityDomainError(std::string(what) + ": negative operand " + std::to_string(x));
  return -0.25 * std::log(x);
}

struct ModeView {
  double omega;
  double lambda;
  double eta;
};

}  // namespace detail

inline MeanFieldReport mean_field_report(const ModelParams& params) {
  params.validate();
  const auto d = dimensionless(params);
  MeanFieldReport r;
  r.phase = classify_phase(d.lambda_a, d.lambda_b);

  if (r.phase == Phase::Normal) {
    const double ra = detail::checked_sqrt(1.0 - d.lambda_a * d.lambda_a, "eps_np");
    const double rb = detail::checked_sqrt(1.0 - d.lambda_b * d.lambda_b, "eps_np");
    r.sz_mean = -1.0;
    r.gap = params.omega_a * ra + params.omega_b * rb;
    r.ground_energy = -0.5 * (params.delta + params.omega_a + params.omega_b) + 0.5 * params.omega_a * ra +
                      0.5 * params.omega_b * rb;
    r.squeeze_a = detail::squeeze_from(1.0 - d.lambda_a * d.lambda_a, "r_a");
    r.squeeze_b = detail::squeeze_from(1.0 - d.lambda_b * d.lambda_b, "r_b");
    r.omega_tilde = params.delta;
    return r;
  }

  // "hot" is the macroscopically excited mode, "cold" the other one.
  const bool a_hot = r.phase == Phase::ASuper;
  const detail::ModeView hot = a_hot ? detail::ModeView{params.omega_a, d.lambda_a, d.eta_a}
                                     : detail::ModeView{params.omega_b, d.lambda_b, d.eta_b};
  const detail::ModeView cold = a_hot ? detail::ModeView{params.omega_b, d.lambda_b, d.eta_b}
                                      : detail::ModeView{params.omega_a, d.lambda_a, d.eta_a};
  const double g_hot = a_hot ? params.g_a : params.g_b;

  const double l2 = hot.lambda * hot.lambda;
  const double l4 = l2 * l2;
  const double density = (l4 - 1.0) / (4.0 * l2);
  const double root_hot = detail::checked_sqrt(1.0 - 1.0 / l4, "eps_sp");
  const double ratio2 = (cold.lambda / hot.lambda) * (cold.lambda / hot.lambda);
  const double root_cold = detail::checked_sqrt(1.0 - ratio2, "eps_sp");

  r.sz_mean = -1.0 / l2;
  r.gap = hot.omega * root_hot + cold.omega * root_cold;
  r.ground_energy = params.delta * density - 0.5 * params.delta * l2 - 0.5 * (params.omega_a + params.omega_b) +
                    0.5 * hot.omega * root_hot + 0.5 * cold.omega * root_cold;
  r.displacement = std::sqrt(hot.eta * density);
  r.omega_tilde = std::sqrt(params.delta * params.delta +
                            16.0 * r.displacement * r.displacement * g_hot * g_hot);
  r.spin_angle = 0.5 * std::acos(std::clamp(-params.delta / r.omega_tilde, -1.0, 1.0));

  const double squeeze_hot = detail::squeeze_from(1.0 - 1.0 / l4, "r~ (excited mode)");
  const double squeeze_cold = detail::squeeze_from(1.0 - ratio2, "r~ (other mode)");
  if (a_hot) {
    r.na_density = density;
    r.squeeze_a = squeeze_hot;
    r.squeeze_b = squeeze_cold;
  } else {
    r.nb_density = density;
    r.squeeze_b = squeeze_hot;
    r.squeeze_a = squeeze_cold;
  }
  return r;
}

namespace detail {

// D(alpha) S(r)|0> on a single mode with truncation n_max. The exponentials
// are taken in a padded space; weight beyond n_max is returned as `lost`.
struct ModeVector {
  Eigen::VectorXd amplitudes;  // length n_max + 1
  double lost = 0.0;
};

inline ModeVector displaced_squeezed_vacuum(double alpha, double r, int n_max) {
  if (!std::isfinite(r) || !std::isfinite(alpha)) {
    throw TruncationError("ground_state_construction: infinite squeeze or displacement at the critical point");
  }
  const int padded = std::max(2 * n_max, n_max + 40);
  const int dim = padded + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Eigen::MatrixXd ad = a.transpose();

  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v(0) = 1.0;
  if (r != 0.0) {
    const Eigen::MatrixXd gen = 0.5 * r * (ad * ad - a * a);
    v = gen.exp() * v;
  }
  if (alpha != 0.0) {
    const Eigen::MatrixXd gen = alpha * (ad - a);
    v = gen.exp() * v;
  }
  ModeVector out;
  out.amplitudes = v.head(n_max + 1);
  out.lost = std::max(0.0, 1.0 - out.amplitudes.squaredNorm());
  return out;
}

}  // namespace detail

inline constexpr double kMeanFieldNormLossTolerance = 1e-6;

// Symmetry-broken mean-field ground state in the product basis:
//   normal:  S(r_a) S(r_b) |down>|0,0>
//   a-SP:    [D(alpha_a) S(r~_a)] S(r~_b) (sin t |down> - cos t |up>)|0,0>
//   b-SP:    S(r~_a) [D(alpha_b) S(r~_b)] (sin t |down> + i cos t |up>)|0,0>
// with alpha >= 0. The b-SP spin phase follows from the sy coupling.
inline QuantumState ground_state_construction(const MeanFieldReport& report, const HilbertSpace& space,
                                              Gauge gauge = Gauge::Complex) {
  const double alpha_a = report.phase == Phase::ASuper ? report.displacement : 0.0;
  const double alpha_b = report.phase == Phase::BSuper ? report.displacement : 0.0;
  const auto va = detail::displaced_squeezed_vacuum(alpha_a, report.squeeze_a, space.n_max_a());
  const auto vb = detail::displaced_squeezed_vacuum(alpha_b, report.squeeze_b, space.n_max_b());

  const double kept = (1.0 - va.lost) * (1.0 - vb.lost);
  if (1.0 - kept > kMeanFieldNormLossTolerance) {
    throw TruncationError("ground_state_construction: norm loss " + std::to_string(1.0 - kept) +
                          " exceeds tolerance; increase n_max");
  }

  cplx down = 1.0;
  cplx up = 0.0;
  if (report.phase != Phase::Normal) {
    const double s = std::sin(report.spin_angle);
    const double c = std::cos(report.spin_angle);
    down = s;
    up = report.phase == Phase::ASuper ? cplx(-c) : cplx(0.0, c);
  }

  QuantumState psi(space.dim());
  for (Index i = 0; i < space.dim(); ++i) {
    const BasisLabel l = space.decode(i);
    psi(i) = (l.spin == Spin::Down ? down : up) * va.amplitudes(l.n_a) * vb.amplitudes(l.n_b);
  }
  psi.normalize();
  return gauge == Gauge::Real ? to_real_gauge(psi, space) : psi;
}

}  // namespace jt
