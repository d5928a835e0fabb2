#pragma once

/*
 * Scan drivers behind the command-line subcommands. Each driver turns a
 * RunConfig into a ResultTable; scan points run on a small worker pool and
 * are gathered in input order, so output does not depend on scheduling.
 *
 * Times in tables and in time_grid are in units of 1/omega_a.
 */

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "jtmodel/io/config.hpp"
#include "jtmodel/io/table.hpp"
#include "jtmodel/meanfield.hpp"

namespace jt::io {

struct RunResult {
  ResultTable table;
  std::vector<std::string> warnings;
  int exit_code = 0;
};

// f(i) for i in [0, n) on `jobs` threads; results and the first exception
// (by index) are reported in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline Cell num_or_empty(double v) { return std::isfinite(v) ? Cell{v} : Cell{std::monostate{}}; }

// Sets a model key, dropping the alternative spelling of the same coupling.
inline void set_model_value(ModelSpec& m, const std::string& key, double v) {
  if (key == "lambda_a") m.values.erase("g_a");
  if (key == "g_a") m.values.erase("lambda_a");
  if (key == "lambda_b") m.values.erase("g_b");
  if (key == "g_b") m.values.erase("lambda_b");
  m.set(key, v);
}

inline std::string axis_unit(const std::string& axis) {
  if (axis == "g_a" || axis == "g_b" || axis == "delta" || axis == "omega_a" || axis == "omega_b") return "energy";
  if (axis == "omega_a_delta" || axis == "omega_b_delta") return "energy^2";
  return "1";
}

class Context {
 public:
  explicit Context(const RunConfig& cfg) : cfg_(cfg), cache_(SpectrumCache::from_environment()) {}

  const RunConfig& cfg() const { return cfg_; }

  template <class Scalar>
  std::shared_ptr<const Spectrum<Scalar>> spectrum(const ModelParams& p) {
    if (auto w = check_dimension(cfg_, p.n_max_a, p.n_max_b)) warn(*w);
    auto spec = cache_.template get_or_compute<Scalar>(p, cfg_.sector);
    std::lock_guard lock(mutex_);
    fingerprints_.insert(to_hex(spec->fingerprint()));
    return spec;
  }

  void record(Fingerprint fp) {
    std::lock_guard lock(mutex_);
    fingerprints_.insert(to_hex(fp));
  }

  void warn(const std::string& w) {
    std::lock_guard lock(mutex_);
    if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end()) warnings_.push_back(w);
  }

  RunResult finish(ResultTable table, const std::string& command) {
    auto& prov = table.provenance();
    prov["command"] = command;
    prov["version"] = kVersion;
    prov["config"] = config_to_json(cfg_);
    prov["time_unit"] = "1/omega_a";
    prov["spectrum_fingerprints"] = std::vector<std::string>(fingerprints_.begin(), fingerprints_.end());
    RunResult r{std::move(table), warnings_, 0};
    const auto status = r.table.column_index("status");
    for (const auto& row : r.table.rows()) {
      const auto& s = std::get<std::string>(row[static_cast<std::size_t>(status)]);
      if (s == "empty_shell" || s == "validity_domain") r.exit_code = 4;
    }
    return r;
  }

 private:
  const RunConfig& cfg_;
  SpectrumCache cache_;
  std::mutex mutex_;
  std::set<std::string> fingerprints_;
  std::vector<std::string> warnings_;
};

template <class F>
RunResult with_gauge(Gauge g, F&& f) {
  if (g == Gauge::Real) return f.template operator()<double>();
  return f.template operator()<cplx>();
}

inline std::vector<ModelSpec> parameter_sets(const RunConfig& cfg) {
  std::vector<ModelSpec> sets = cfg.parameter_sets.empty() ? std::vector<ModelSpec>{cfg.model} : cfg.parameter_sets;
  for (std::size_t k = 0; k < sets.size(); ++k)
    if (sets[k].label.empty()) sets[k].label = "set" + std::to_string(k);
  return sets;
}

// Grid in units of 1/omega_a; default 2000 points over 100 periods of the slower mode.
inline std::vector<double> time_grid(const RunConfig& cfg, const ModelParams& p) {
  if (cfg.time_grid) return TimeGrid{cfg.time_grid->t_max, cfg.time_grid->points}.times();
  const TimeGrid g = default_time_grid(p);
  return TimeGrid{g.t_max * p.omega_a, g.points}.times();
}

inline std::vector<double> physical_times(const std::vector<double>& t, double omega_a) {
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k] / omega_a;
  return out;
}

inline const ScanSpec& require_scan(const RunConfig& cfg, std::initializer_list<const char*> axes,
                                    const char* command) {
  if (!cfg.scan) throw ConfigError(std::string(command) + " needs a scan {axis, values}");
  for (const char* a : axes)
    if (cfg.scan->axis == a) return *cfg.scan;
  std::string allowed;
  for (const char* a : axes) allowed += std::string(allowed.empty() ? "" : ", ") + a;
  throw ConfigError(std::string(command) + ": scan axis must be one of " + allowed + "; got '" + cfg.scan->axis + "'");
}

struct LinearFit {
  double slope = kNaN;
  double intercept = kNaN;
  double r_squared = kNaN;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Index>(x.size());
  if (n < 2) return {};
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    a(i, 0) = x[static_cast<std::size_t>(i)];
    a(i, 1) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const double ss_res = (a * c - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).square().sum();
  return {c(0), c(1), ss_tot > 0 ? 1.0 - ss_res / ss_tot : kNaN};
}

}  // namespace detail

// Mean-field and exact ground-state order parameters along a lambda_a (or
// g_a) sweep, for each eta in cfg.etas (applied to both modes).
inline RunResult cmd_phase_scan(const RunConfig& cfg) {
  const auto& scan = detail::require_scan(cfg, {"lambda_a", "g_a"}, "phase-scan");
  if (cfg.etas.empty()) throw ConfigError("phase-scan needs a non-empty 'etas' list");
  detail::Context ctx(cfg);
  ResultTable table({numeric("eta", "1"), numeric("lambda_a", "1"), numeric("g_a", "energy"), numeric("lambda_b", "1"),
                     numeric("mf_na_density", "1"), numeric("mf_nb_density", "1"), numeric("mf_sz", "1"), numeric("mf_ground_energy", "energy"), numeric("ed_na_density", "1"),
                     numeric("ed_nb_density", "1"), numeric("ed_sz", "1"), numeric("ed_ground_energy", "energy"),
                     text("status")});
  struct Point {
    double eta, value;
  };
  std::vector<Point> points;
  for (double eta : cfg.etas)
    for (double v : scan.values) points.push_back({eta, v});

  return detail::with_gauge(cfg.gauge, [&]<class Scalar>() {
    auto rows = parallel_map<std::vector<Cell>>(points.size(), cfg.jobs, [&](std::size_t i) {
      ModelSpec spec = cfg.model;
      detail::set_model_value(spec, "eta_a", points[i].eta);
      detail::set_model_value(spec, "eta_b", points[i].eta);
      detail::set_model_value(spec, scan.axis, points[i].value);
      const ModelParams p = cfg.resolve(spec);
      const auto d = dimensionless(p);
      std::string status = "ok";
      double mf_na = detail::kNaN, mf_nb = detail::kNaN, mf_sz = detail::kNaN, mf_e = detail::kNaN;
      try {
        const auto r = mean_field_report(p);
        mf_na = r.na_density;
        mf_nb = r.nb_density;
        mf_sz = r.sz_mean;
        mf_e = r.ground_energy;
      } catch (const DegenerateBoundaryError&) {
        status = "coexistence";
      } catch (const ValidityDomainError&) {
        status = "validity_domain";
      }
      const auto sp = ctx.spectrum<Scalar>(p);
      const auto [e0, psi] = ground_state(*sp);
      const auto& space = sp->space();
      const double na = expectation(psi, build_number(Mode::A, space)).real();
      const double nb = expectation(psi, build_number(Mode::B, space)).real();
      const double sz = expectation(psi, build_pauli(Axis::Z, space)).real();
      return std::vector<Cell>{points[i].eta, d.lambda_a, p.g_a, d.lambda_b,
                               detail::num_or_empty(mf_na), detail::num_or_empty(mf_nb), detail::num_or_empty(mf_sz),
                               detail::num_or_empty(mf_e), na / d.eta_a, nb / d.eta_b, sz, e0, status};
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return ctx.finish(std::move(table), "phase-scan");
  });
}

// <O(t)> after a quench from a product state, with the diagonal-ensemble line.
inline RunResult cmd_quench(const RunConfig& cfg) {
  detail::Context ctx(cfg);
  const auto sets = detail::parameter_sets(cfg);
  std::vector<ColumnSpec> cols{text("set"), numeric("t", "1/omega_a"), numeric(to_string(cfg.observable), "1"),
                               numeric("diagonal_ensemble", "1")};
  if (cfg.include_distance) cols.push_back(numeric("distance_to_de", "1"));
  cols.push_back(text("status"));
  ResultTable table(cols);
  const BasisLabel init = cfg.initial_states.front();
  if (cfg.initial_states.size() > 1) ctx.warn("warning: only the first initial state is used");

  return detail::with_gauge(cfg.gauge, [&]<class Scalar>() {
    auto blocks = parallel_map<std::vector<std::vector<Cell>>>(sets.size(), cfg.jobs, [&](std::size_t i) {
      const ModelParams p = cfg.resolve(sets[i]);
      const auto sp = ctx.spectrum<Scalar>(p);
      const auto st = expand_initial(init, *sp);
      for (const auto& w : st.warnings) ctx.warn(w);
      const auto obs = ObservableSpec::make(cfg.observable, sp->space());
      const auto de = diagonal_average(st, obs, *sp);
      const std::string status = de.approximate ? "degenerate_weight" : "ok";
      const auto t = detail::time_grid(cfg, p);
      const auto series = observable_series(st, obs, *sp, detail::physical_times(t, p.omega_a));
      std::vector<std::vector<Cell>> rows;
      for (std::size_t k = 0; k < t.size(); ++k) {
        std::vector<Cell> row{sets[i].label, t[k], series.values[k], de.value};
        if (cfg.include_distance) row.emplace_back(std::abs(series.values[k] - de.value));
        row.emplace_back(status);
        rows.push_back(std::move(row));
      }
      return rows;
    });
    for (auto& b : blocks)
      for (auto& r : b) table.add_row(std::move(r));
    return ctx.finish(std::move(table), "quench");
  });
}

// DE vs ME comparison along an eta_b (or delta) scan; optional lambda_a = 0 control rows.
inline RunResult cmd_eth_report(const RunConfig& cfg) {
  const auto& scan = detail::require_scan(cfg, {"eta_b", "delta"}, "eth-report");
  detail::Context ctx(cfg);
  ResultTable table({text("variant"), numeric("eta_b", "1"), numeric("delta", "energy"), numeric("lambda_a", "1"), numeric("lambda_b", "1"), numeric("diagonal_ensemble", "1"),
                     numeric("microcanonical", "1"), numeric("ensemble_difference", "1"),
                     numeric("eev_deviation", "1"), numeric("time_fluctuations", "1"), numeric("shell_count", "1"),
                     numeric("shell_fraction", "1"), numeric("e0", "energy"), text("status")});
  struct Point {
    std::string variant;
    double value;
  };
  std::vector<Point> points;
  for (const char* variant : {"jt", "rabi"}) {
    if (std::string(variant) == "rabi" && !cfg.rabi_control) continue;
    for (double v : scan.values) points.push_back({variant, v});
  }
  const BasisLabel init = cfg.initial_states.front();
  if (cfg.initial_states.size() > 1) ctx.warn("warning: only the first initial state is used");

  return detail::with_gauge(cfg.gauge, [&]<class Scalar>() {
    auto rows = parallel_map<std::vector<Cell>>(points.size(), cfg.jobs, [&](std::size_t i) {
      ModelSpec spec = cfg.model;
      detail::set_model_value(spec, scan.axis, points[i].value);
      if (points[i].variant == "rabi") detail::set_model_value(spec, "lambda_a", 0.0);
      const ModelParams p = cfg.resolve(spec);
      const auto d = dimensionless(p);
      const auto sp = ctx.spectrum<Scalar>(p);
      const auto st = expand_initial(init, *sp);
      for (const auto& w : st.warnings) ctx.warn(w);
      const auto obs = ObservableSpec::make(cfg.observable, sp->space());
      const auto de = diagonal_average(st, obs, *sp);
      const double fluct = time_fluctuations(st, obs, *sp);
      std::string status = de.approximate ? "degenerate_weight" : "ok";
      double me = detail::kNaN, dev = detail::kNaN, count = detail::kNaN;
      try {
        const double half_width = shell_half_width(st, *sp, cfg.shell_fraction);
        const auto m = microcanonical_average(obs, *sp, st.energy_e0, half_width);
        me = m.value;
        count = double(m.count);
        try {
          dev = eev_deviation(obs, *sp, st.energy_e0, half_width);
        } catch (const DomainError&) {
          status = "zero_eev_sum";
        }
      } catch (const EmptyShellError& e) {
        status = "empty_shell";
        ctx.warn(e.what());
      } catch (const ConfigError& e) {
        // E0 at the ground energy leaves no shell
        status = "empty_shell";
        ctx.warn(e.what());
      }
      return std::vector<Cell>{points[i].variant, d.eta_b, p.delta, d.lambda_a, d.lambda_b, de.value,
                               detail::num_or_empty(me), detail::num_or_empty(std::abs(de.value - me)),
                               detail::num_or_empty(dev), fluct, detail::num_or_empty(count), cfg.shell_fraction,
                               st.energy_e0, status};
    });
    for (auto& r : rows) table.add_row(std::move(r));
    return ctx.finish(std::move(table), "eth-report");
  });
}

// d_eff and time fluctuations per initial state along a g_b (lambda_b) or
// n_max scan, with a log-log fit of delta^2 against d_eff.
inline RunResult cmd_deff_scan(const RunConfig& cfg) {
  const auto& scan = detail::require_scan(cfg, {"g_b", "lambda_b", "n_max"}, "deff-scan");
  detail::Context ctx(cfg);
  ResultTable table({text("kind"), text("initial"), numeric(scan.axis, detail::axis_unit(scan.axis)),
                     numeric("d_eff", "1"), numeric("time_fluctuations", "1"), numeric("slope", "1"),
                     numeric("intercept", "1"), numeric("r_squared", "1"), text("status")});
  const bool by_truncation = scan.axis == "n_max";
  if (by_truncation)
    for (double v : scan.values)
      if (v != std::floor(v) || v < 1) throw ConfigError("n_max scan values must be positive integers");

  return detail::with_gauge(cfg.gauge, [&]<class Scalar>() {
    auto blocks = parallel_map<std::vector<std::vector<Cell>>>(scan.values.size(), cfg.jobs, [&](std::size_t i) {
      ModelSpec spec = cfg.model;
      ModelParams p;
      if (by_truncation) {
        const int n = static_cast<int>(scan.values[i]);
        p = spec.resolve(n, n);
      } else {
        detail::set_model_value(spec, scan.axis, scan.values[i]);
        p = cfg.resolve(spec);
      }
      const auto sp = ctx.spectrum<Scalar>(p);
      const auto obs = ObservableSpec::make(cfg.observable, sp->space());
      std::vector<std::vector<Cell>> rows;
      for (const auto& l : cfg.initial_states) {
        const auto st = expand_initial(l, *sp);
        rows.push_back({std::string("point"), to_string(l), scan.values[i], effective_dimension(st),
                        time_fluctuations(st, obs, *sp), std::monostate{}, std::monostate{}, std::monostate{},
                        std::string("ok")});
      }
      return rows;
    });
    std::vector<double> x, y;
    for (auto& b : blocks)
      for (auto& r : b) {
        const double deff = std::get<double>(r[3]);
        const double fl = std::get<double>(r[4]);
        if (deff > 0 && fl > 0) {
          x.push_back(std::log(deff));
          y.push_back(std::log(fl));
        }
        table.add_row(std::move(r));
      }
    const auto fit = detail::least_squares(x, y);
    table.add_row({std::string("fit"), std::string("all"), std::monostate{}, std::monostate{}, std::monostate{},
                   detail::num_or_empty(fit.slope), detail::num_or_empty(fit.intercept),
                   detail::num_or_empty(fit.r_squared),
                   std::string(std::isfinite(fit.slope) ? "loglog_fit" : "insufficient_points")});
    return ctx.finish(std::move(table), "deff-scan");
  });
}

// Renyi-2 entropy of the spin after a quench, one column per parameter set.
inline RunResult cmd_entropy(const RunConfig& cfg) {
  detail::Context ctx(cfg);
  const auto sets = detail::parameter_sets(cfg);
  struct Column {
    std::size_t set;
    BasisLabel init;
  };
  std::vector<Column> runs;
  std::vector<ColumnSpec> cols{numeric("t", "1/omega_a")};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const auto& l : cfg.initial_states) {
      runs.push_back({i, l});
      std::string name = "renyi2_" + sets[i].label;
      if (cfg.initial_states.size() > 1) name += "_" + to_string(l);
      cols.push_back(numeric(name, "1"));
    }
  }
  cols.push_back(text("status"));
  ResultTable table(cols);
  const auto t = detail::time_grid(cfg, cfg.resolve(sets.front()));

  return detail::with_gauge(cfg.gauge, [&]<class Scalar>() {
    auto series = parallel_map<std::vector<double>>(runs.size(), cfg.jobs, [&](std::size_t i) {
      const ModelParams p = cfg.resolve(sets[runs[i].set]);
      const auto sp = ctx.spectrum<Scalar>(p);
      const auto st = expand_initial(runs[i].init, *sp);
      for (const auto& w : st.warnings) ctx.warn(w);
      return renyi_entropy_series(st, *sp, detail::physical_times(t, p.omega_a)).values;
    });
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::vector<Cell> row{t[k]};
      for (const auto& s : series) row.emplace_back(s[k]);
      row.emplace_back(std::string("ok"));
      table.add_row(std::move(row));
    }
    return ctx.finish(std::move(table), "entropy");
  });
}

// Truncation convergence of ground energy, d_eff or a ground-state observable.
inline RunResult cmd_converge(const RunConfig& cfg) {
  const auto& scan = detail::require_scan(cfg, {"n_max"}, "converge");
  detail::Context ctx(cfg);
  std::vector<int> ns;
  for (double v : scan.values) {
    if (v != std::floor(v) || v < 1) throw ConfigError("n_max scan values must be positive integers");
    ns.push_back(static_cast<int>(v));
    if (auto w = check_dimension(cfg, ns.back(), ns.back())) ctx.warn(*w);
  }
  ConvergenceOptions opt;
  opt.tolerance = cfg.tolerance;
  opt.initial = cfg.initial_states.front();
  opt.observable = cfg.observable;
  opt.sector = cfg.sector;
  const ModelParams base = cfg.model.resolve(ns.front(), ns.front());
  const auto rep = convergence_scan(base, ns, cfg.metric, opt);
  for (int n : ns) {
    ModelParams p = base;
    p.n_max_a = p.n_max_b = n;
    ctx.record(fingerprint(p, Gauge::Real, cfg.sector));
  }
  ResultTable table({numeric("n_max", "1"),
                     numeric(to_string(cfg.metric), cfg.metric == ConvergenceMetric::GroundEnergy ? "energy" : "1"),
                     numeric("relative_change", "1"), text("status")});
  for (const auto& r : rep.rows) {
    std::string status = "ok";
    if (rep.converged_at && *rep.converged_at == r.n_max) status = "converged";
    if (!rep.converged_at && &r == &rep.rows.back()) status = "not_converged";
    table.add_row({double(r.n_max), r.value, r.relative_change ? Cell{*r.relative_change} : Cell{std::monostate{}},
                   status});
  }
  table.provenance()["converged_at"] = rep.converged_at ? nlohmann::json(*rep.converged_at) : nlohmann::json(nullptr);
  table.provenance()["convergence_status"] = rep.status;
  return ctx.finish(std::move(table), "converge");
}

inline RunResult run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "phase-scan") return cmd_phase_scan(cfg);
  if (command == "quench") return cmd_quench(cfg);
  if (command == "eth-report") return cmd_eth_report(cfg);
  if (command == "deff-scan") return cmd_deff_scan(cfg);
  if (command == "entropy") return cmd_entropy(cfg);
  if (command == "converge") return cmd_converge(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace jt::io
