#pragma once

/*
 * Run configuration for the command-line drivers.
 *
 * A model is given by any sufficient subset of
 *   omega_a, omega_b, delta, omega_a_delta (= w_a Delta), omega_b_delta,
 *   eta_a (= Delta / w_a), eta_b, omega_ratio (= w_a / w_b),
 *   g_a | lambda_a, g_b | lambda_b.
 * Frequencies left undetermined by these relations are fixed with the anchor
 * w_a = 1. Inconsistent over-specification is a configuration error.
 */

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jtmodel/convergence.hpp"
#include "jtmodel/dynamics.hpp"

namespace jt::io {

using json = nlohmann::json;

inline constexpr Index kDeskDimensionCap = 3362;  // 2 * 41^2, n_max = 40

inline const std::set<std::string>& model_keys() {
  static const std::set<std::string> keys{"omega_a", "omega_b",  "delta",       "g_a",         "g_b",
                                          "lambda_a", "lambda_b", "eta_a",       "eta_b",       "omega_a_delta",
                                          "omega_b_delta", "omega_ratio"};
  return keys;
}

struct ModelSpec {
  std::string label;
  std::map<std::string, double> values;

  bool has(const std::string& k) const { return values.contains(k); }

  void set(const std::string& key, double v) {
    if (!model_keys().contains(key)) throw ConfigError("unknown model parameter '" + key + "'");
    values[key] = v;
  }

  ModelParams resolve(int n_max_a, int n_max_b) const {
    for (const auto& [k, v] : values)
      if (!std::isfinite(v)) throw ConfigError("model parameter '" + k + "' is not finite");
    std::optional<double> wa, wb, d;
    auto get = [&](const char* k) -> std::optional<double> {
      if (auto it = values.find(k); it != values.end()) return it->second;
      return std::nullopt;
    };
    wa = get("omega_a");
    wb = get("omega_b");
    d = get("delta");
    const auto pa = get("omega_a_delta"), pb = get("omega_b_delta");
    const auto ea = get("eta_a"), eb = get("eta_b"), ratio = get("omega_ratio");

    auto propagate = [&] {
      for (bool changed = true; changed;) {
        changed = false;
        auto fill = [&](std::optional<double>& x, std::optional<double> v) {
          if (!x && v) {
            x = v;
            changed = true;
          }
        };
        if (pa && ea && !wa && !d) fill(wa, std::sqrt(*pa / *ea));
        if (pb && eb && !wb && !d) fill(wb, std::sqrt(*pb / *eb));
        if (pa) {
          if (wa && !d) fill(d, *pa / *wa);
          if (d && !wa) fill(wa, *pa / *d);
        }
        if (pb) {
          if (wb && !d) fill(d, *pb / *wb);
          if (d && !wb) fill(wb, *pb / *d);
        }
        if (ea) {
          if (wa && !d) fill(d, *ea * *wa);
          if (d && !wa) fill(wa, *d / *ea);
        }
        if (eb) {
          if (wb && !d) fill(d, *eb * *wb);
          if (d && !wb) fill(wb, *d / *eb);
        }
        if (ratio) {
          if (wb && !wa) fill(wa, *ratio * *wb);
          if (wa && !wb) fill(wb, *wa / *ratio);
        }
      }
    };
    propagate();
    if (!wa) {
      wa = 1.0;
      propagate();
    }
    if (!wb || !d) throw ConfigError("model is under-determined: cannot fix omega_b and delta from the given keys");

    auto check = [](const char* what, std::optional<double> given, double derived) {
      if (given && std::abs(*given - derived) > 1e-9 * std::max(std::abs(*given), std::abs(derived))) {
        throw ConfigError(std::string("model parameters are inconsistent: ") + what + " = " + std::to_string(*given) +
                          " but the other keys imply " + std::to_string(derived));
      }
    };
    check("omega_a_delta", pa, *wa * *d);
    check("omega_b_delta", pb, *wb * *d);
    check("eta_a", ea, *d / *wa);
    check("eta_b", eb, *d / *wb);
    check("omega_ratio", ratio, *wa / *wb);

    ModelParams m;
    m.omega_a = *wa;
    m.omega_b = *wb;
    m.delta = *d;
    m.n_max_a = n_max_a;
    m.n_max_b = n_max_b;
    auto coupling = [&](const char* g_key, const char* l_key, double omega) {
      const auto g = get(g_key);
      const auto l = get(l_key);
      if (l) {
        const double from_l = *l * critical_coupling(omega, *d);
        check(g_key, g, from_l);
        return from_l;
      }
      return g.value_or(0.0);
    };
    m.g_a = coupling("g_a", "lambda_a", m.omega_a);
    m.g_b = coupling("g_b", "lambda_b", m.omega_b);
    m.validate();
    return m;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline BasisLabel parse_label(const std::string& text) {
  std::stringstream ss(text);
  std::string spin, a, b;
  if (!std::getline(ss, spin, ',') || !std::getline(ss, a, ',') || !std::getline(ss, b)) {
    throw ConfigError("initial state '" + text + "' is not of the form spin,n_a,n_b");
  }
  BasisLabel l;
  if (spin == "down" || spin == "d") {
    l.spin = Spin::Down;
  } else if (spin == "up" || spin == "u") {
    l.spin = Spin::Up;
  } else {
    throw ConfigError("initial state spin must be 'down' or 'up', got '" + spin + "'");
  }
  try {
    std::size_t pa = 0, pb = 0;
    l.n_a = std::stoi(a, &pa);
    l.n_b = std::stoi(b, &pb);
    if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("initial state '" + text + "' has non-integer occupations");
  }
  if (l.n_a < 0 || l.n_b < 0) throw ConfigError("initial state occupations must be >= 0");
  return l;
}

inline ObservableKind parse_observable(const std::string& s) {
  for (ObservableKind k : {ObservableKind::SpinProjectorDown, ObservableKind::SigmaZ, ObservableKind::Identity})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown observable '" + s + "' (expected spin_projector_down, sigma_z or identity)");
}

inline Gauge parse_gauge(const std::string& s) {
  if (s == "real") return Gauge::Real;
  if (s == "complex") return Gauge::Complex;
  throw ConfigError("gauge must be 'complex' or 'real', got '" + s + "'");
}

inline Sector parse_sector(const std::string& s) {
  for (Sector k : {Sector::Full, Sector::Even, Sector::Odd, Sector::Auto})
    if (s == to_string(k)) return k;
  throw ConfigError("sector must be one of full, even, odd, auto; got '" + s + "'");
}

inline ConvergenceMetric parse_metric(const std::string& s) {
  for (ConvergenceMetric m : {ConvergenceMetric::GroundEnergy, ConvergenceMetric::EffectiveDimension,
                              ConvergenceMetric::Observable})
    if (s == to_string(m)) return m;
  throw ConfigError("metric must be ground_energy, d_eff or observable; got '" + s + "'");
}

struct ScanSpec {
  std::string axis;
  std::vector<double> values;
  friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

// Time grid in units of 1/omega_a.
struct TimeGridSpec {
  double t_max = 0.0;
  Index points = 2000;
  friend bool operator==(const TimeGridSpec&, const TimeGridSpec&) = default;
};

struct RunConfig {
  std::string command;
  ModelSpec model;
  std::vector<ModelSpec> parameter_sets;
  int n_max = 40;
  std::optional<int> n_max_a;
  std::optional<int> n_max_b;
  std::vector<BasisLabel> initial_states{BasisLabel{Spin::Down, 0, 0}};
  ObservableKind observable = ObservableKind::SpinProjectorDown;
  std::optional<ScanSpec> scan;
  std::vector<double> etas;
  double shell_fraction = 0.5;
  std::optional<TimeGridSpec> time_grid;
  bool include_distance = false;
  bool rabi_control = false;
  ConvergenceMetric metric = ConvergenceMetric::GroundEnergy;
  double tolerance = 1e-3;
  Gauge gauge = Gauge::Real;
  Sector sector = Sector::Auto;
  std::string format = "csv";
  std::string out;
  bool paper_scale = false;
  int jobs = 1;

  int truncation_a() const { return n_max_a.value_or(n_max); }
  int truncation_b() const { return n_max_b.value_or(n_max); }

  ModelParams resolve(const ModelSpec& spec) const { return spec.resolve(truncation_a(), truncation_b()); }

  void validate() const {
    if (n_max < 1 || truncation_a() < 1 || truncation_b() < 1) throw ConfigError("n_max must be >= 1");
    if (!(shell_fraction > 0.0 && shell_fraction < 1.0)) throw ConfigError("shell_fraction must lie in (0, 1)");
    if (time_grid && (!(time_grid->t_max > 0.0) || time_grid->points < 2))
      throw ConfigError("time_grid needs t_max > 0 and points >= 2");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (initial_states.empty()) throw ConfigError("at least one initial state is required");
    if (scan && scan->values.empty()) throw ConfigError("scan.values is empty");
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline ModelSpec model_from_json(const json& j, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  ModelSpec m;
  for (const auto& [k, v] : j.items()) {
    if (k == "label") {
      m.label = v.get<std::string>();
      continue;
    }
    if (!v.is_number()) throw ConfigError(std::string(where) + "." + k + " must be a number");
    m.set(k, v.get<double>());
  }
  return m;
}

inline json model_to_json(const ModelSpec& m) {
  json j = json::object();
  if (!m.label.empty()) j["label"] = m.label;
  for (const auto& [k, v] : m.values) j[k] = v;
  return j;
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "command") c.command = v.get<std::string>();
      else if (k == "model") c.model = detail::model_from_json(v, "model");
      else if (k == "parameter_sets") {
        c.parameter_sets.clear();
        for (const auto& s : v) c.parameter_sets.push_back(detail::model_from_json(s, "parameter_sets[]"));
      } else if (k == "n_max") c.n_max = v.get<int>();
      else if (k == "n_max_a") c.n_max_a = v.get<int>();
      else if (k == "n_max_b") c.n_max_b = v.get<int>();
      else if (k == "initial_state") c.initial_states = {parse_label(v.get<std::string>())};
      else if (k == "initial_states") {
        c.initial_states.clear();
        for (const auto& s : v) c.initial_states.push_back(parse_label(s.get<std::string>()));
      } else if (k == "observable") c.observable = parse_observable(v.get<std::string>());
      else if (k == "scan") c.scan = ScanSpec{v.at("axis").get<std::string>(), v.at("values").get<std::vector<double>>()};
      else if (k == "etas") c.etas = v.get<std::vector<double>>();
      else if (k == "shell_fraction") c.shell_fraction = v.get<double>();
      else if (k == "time_grid") c.time_grid = TimeGridSpec{v.at("t_max").get<double>(), v.value("points", Index{2000})};
      else if (k == "include_distance") c.include_distance = v.get<bool>();
      else if (k == "rabi_control") c.rabi_control = v.get<bool>();
      else if (k == "metric") c.metric = parse_metric(v.get<std::string>());
      else if (k == "tolerance") c.tolerance = v.get<double>();
      else if (k == "gauge") c.gauge = parse_gauge(v.get<std::string>());
      else if (k == "sector") c.sector = parse_sector(v.get<std::string>());
      else if (k == "format") c.format = v.get<std::string>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "paper_scale") c.paper_scale = v.get<bool>();
      else if (k == "jobs") c.jobs = v.get<int>();
      else throw ConfigError("unknown configuration key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["model"] = detail::model_to_json(c.model);
  if (!c.parameter_sets.empty()) {
    j["parameter_sets"] = json::array();
    for (const auto& s : c.parameter_sets) j["parameter_sets"].push_back(detail::model_to_json(s));
  }
  j["n_max"] = c.n_max;
  if (c.n_max_a) j["n_max_a"] = *c.n_max_a;
  if (c.n_max_b) j["n_max_b"] = *c.n_max_b;
  j["initial_states"] = json::array();
  for (const auto& l : c.initial_states) j["initial_states"].push_back(to_string(l));
  j["observable"] = to_string(c.observable);
  if (c.scan) j["scan"] = {{"axis", c.scan->axis}, {"values", c.scan->values}};
  if (!c.etas.empty()) j["etas"] = c.etas;
  j["shell_fraction"] = c.shell_fraction;
  if (c.time_grid) j["time_grid"] = {{"t_max", c.time_grid->t_max}, {"points", c.time_grid->points}};
  j["include_distance"] = c.include_distance;
  j["rabi_control"] = c.rabi_control;
  j["metric"] = to_string(c.metric);
  j["tolerance"] = c.tolerance;
  j["gauge"] = to_string(c.gauge);
  j["sector"] = to_string(c.sector);
  j["format"] = c.format;
  if (!c.out.empty()) j["out"] = c.out;
  j["paper_scale"] = c.paper_scale;
  j["jobs"] = c.jobs;
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// Desk-scale guard; returns a warning when --paper-scale lifts the cap.
inline std::optional<std::string> check_dimension(const RunConfig& c, int n_max_a, int n_max_b) {
  const Index dim = HilbertSpace(n_max_a, n_max_b).dim();
  if (dim <= kDeskDimensionCap) return std::nullopt;
  if (!c.paper_scale) {
    throw ConfigError("total dimension " + std::to_string(dim) + " exceeds the desk-scale cap " +
                      std::to_string(kDeskDimensionCap) + " (n_max = 40); pass --paper-scale to override");
  }
  return "warning: total dimension " + std::to_string(dim) +
         " exceeds the desk-scale cap; dense diagonalization needs O(dim^2) memory and O(dim^3) time";
}

}  // namespace jt::io
