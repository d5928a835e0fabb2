#pragma once

// Truncation convergence of a scalar metric over a list of n_max values.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "jtmodel/ensembles.hpp"

namespace jt {

enum class ConvergenceMetric { GroundEnergy, EffectiveDimension, Observable };

inline const char* to_string(ConvergenceMetric m) {
  switch (m) {
    case ConvergenceMetric::GroundEnergy: return "ground_energy";
    case ConvergenceMetric::EffectiveDimension: return "d_eff";
    case ConvergenceMetric::Observable: return "observable";
  }
  return "?";
}

struct ConvergenceOptions {
  double tolerance = 1e-3;
  // d_eff metric: expansion of this product state.
  BasisLabel initial{Spin::Down, 0, 0};
  // observable metric: ground-state expectation of this operator kind.
  ObservableKind observable = ObservableKind::SpinProjectorDown;
  Sector sector = Sector::Auto;
};

struct ConvergenceRow {
  int n_max = 0;
  double value = 0.0;
  std::optional<double> relative_change;  // against the previous row
};

struct ConvergenceReport {
  ConvergenceMetric metric = ConvergenceMetric::GroundEnergy;
  std::vector<ConvergenceRow> rows;
  std::optional<int> converged_at;  // first n_max whose change is below tolerance
  std::string status;               // "converged" or "not_converged"
};

namespace detail {

inline double relative_change(double current, double previous) {
  const double scale = std::max(std::abs(previous), std::abs(current));
  if (scale == 0.0) return 0.0;
  return std::abs(current - previous) / scale;
}

}  // namespace detail

// Both truncations are set to each n_max in turn. A metric that never
// settles is reported with status "not_converged" rather than an exception.
inline ConvergenceReport convergence_scan(const ModelParams& params, const std::vector<int>& n_max_list,
                                          ConvergenceMetric metric, const ConvergenceOptions& opt = {}) {
  if (n_max_list.empty()) throw ConfigError("convergence_scan: empty n_max list");
  for (std::size_t k = 1; k < n_max_list.size(); ++k)
    if (!(n_max_list[k] > n_max_list[k - 1])) throw ConfigError("convergence_scan: n_max list must be ascending");

  ConvergenceReport rep;
  rep.metric = metric;
  for (int n : n_max_list) {
    ModelParams p = params;
    p.n_max_a = n;
    p.n_max_b = n;
    const RealSpectrum spec = solve<double>(p, opt.sector);
    ConvergenceRow row{n, 0.0, std::nullopt};
    switch (metric) {
      case ConvergenceMetric::GroundEnergy:
        row.value = spec.energy(0);
        break;
      case ConvergenceMetric::EffectiveDimension:
        row.value = effective_dimension(expand_initial(opt.initial, spec));
        break;
      case ConvergenceMetric::Observable: {
        const auto [e, psi] = ground_state(spec);
        row.value = expectation(psi, ObservableSpec::make(opt.observable, spec.space()).matrix).real();
        break;
      }
    }
    if (!rep.rows.empty()) {
      row.relative_change = detail::relative_change(row.value, rep.rows.back().value);
      if (!rep.converged_at && *row.relative_change < opt.tolerance) rep.converged_at = n;
    }
    rep.rows.push_back(row);
  }
  rep.status = rep.converged_at ? "converged" : "not_converged";
  return rep;
}

}  // namespace jt
