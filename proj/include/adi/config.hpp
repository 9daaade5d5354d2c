#pragma once

// One flat configuration record covering every tunable, with a key=value
// file format. Resolution order is defaults, then config file, then flag
// overrides; the CLI echoes the fully resolved result to a sidecar file
// that can be fed back as a config to reproduce the run.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adi/ensemble.hpp"
#include "adi/filters.hpp"
#include "adi/gaussian_mi.hpp"
#include "adi/numeric_io.hpp"
#include "adi/pipeline.hpp"
#include "adi/simulate.hpp"

namespace adi {

namespace detail {

inline std::vector<std::int64_t> parse_int_list(std::string_view text,
                                                const std::string& key) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    if (!item.empty()) {
      std::int64_t v;
      if (!try_parse_int(item, v))
        throw std::invalid_argument(key + ": bad integer '" +
                                    std::string(item) + "'");
      out.push_back(v);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text,
                                             const std::string& key) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    if (!item.empty()) {
      double v;
      if (!try_parse_double(item, v))
        throw std::invalid_argument(key + ": bad number '" +
                                    std::string(item) + "'");
      out.push_back(v);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  return out;
}

template <class T, class Fmt>
std::string join_comma(const std::vector<T>& v, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace detail

struct RunConfig {
  // Gaussian window model
  double bandwidth = 5.0;
  double ridge_rel = 1e-6;
  WindowMode window_mode = WindowMode::Offline;
  CenterMode center = CenterMode::PerSample;
  // ingest
  int smooth_window = 15;
  int stride = 10;
  // pair pipeline
  int markov_order = 1;
  double gate_radius = 100.0;
  int side_cond_max = 3;
  std::size_t min_overlap = 20;
  // ensemble
  std::int64_t tau = 10;
  double beta = 0.01;
  double gamma = 1.0;
  std::vector<FilterSpec> base_filters = default_base_filters();
  std::size_t max_experts = 0;
  // analysis
  std::int64_t max_lag = 50;
  // simulation
  std::int64_t horizon = 1000;
  std::vector<std::int64_t> changepoints = {1, 334, 667};
  std::vector<double> levels = {0.5, 2.0, 1.0};
  std::vector<double> sigmas = {0.1};
  std::int64_t trials = 100;
  std::uint64_t seed = 12345;
  // run plumbing
  std::size_t threads = 0;  // 0 = hardware parallelism
  std::string out_dir = ".";
  std::string scene = "scene";
  std::string input;
  std::string input_format = "annotations";  // annotations | tracks
  std::string tracks;  // track store path for label lookups

  EnsembleHyper to_hyper() const {
    EnsembleHyper h;
    h.tau = tau;
    h.beta = beta;
    h.gamma = gamma;
    h.base_set = base_filters;
    h.max_experts = max_experts;
    return h;
  }

  PairConfig to_pair_config() const {
    PairConfig p;
    p.markov_order = markov_order;
    p.gate_radius = gate_radius;
    p.side_cond_max = side_cond_max;
    p.bandwidth = bandwidth;
    p.ridge_rel = ridge_rel;
    p.window_mode = window_mode;
    p.center = center;
    p.min_overlap = min_overlap;
    p.hyper = to_hyper();
    return p;
  }

  PiecewiseSpec to_piecewise_spec() const {
    PiecewiseSpec s;
    s.T = horizon;
    s.changepoints = changepoints;
    s.levels = levels;
    s.noise_sd = sigmas;
    s.seed = seed;
    return s;
  }

  void validate() const {
    to_pair_config().validate();
    to_piecewise_spec().validate();
    if (smooth_window < 1 || smooth_window % 2 == 0)
      throw std::invalid_argument("smooth_window must be odd and >= 1");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (input_format != "annotations" && input_format != "tracks")
      throw std::invalid_argument(
          "input_format must be 'annotations' or 'tracks'");
  }
};

/// Applies one key=value setting; unknown keys are rejected.
inline void apply_config_key(RunConfig& cfg, const std::string& key,
                             const std::string& value) {
  auto bad = [&](const char* expect) {
    throw std::invalid_argument(key + ": expected " + expect + ", got '" +
                                value + "'");
  };
  auto as_double = [&] {
    double v;
    if (!try_parse_double(value, v)) bad("a number");
    return v;
  };
  auto as_int = [&] {
    std::int64_t v;
    if (!try_parse_int(value, v)) bad("an integer");
    return v;
  };

  if (key == "bandwidth") cfg.bandwidth = as_double();
  else if (key == "ridge_rel") cfg.ridge_rel = as_double();
  else if (key == "window_mode") {
    if (value == "offline") cfg.window_mode = WindowMode::Offline;
    else if (value == "causal") cfg.window_mode = WindowMode::Causal;
    else bad("'offline' or 'causal'");
  } else if (key == "center") {
    if (value == "per-sample") cfg.center = CenterMode::PerSample;
    else if (value == "per-window") cfg.center = CenterMode::PerWindow;
    else bad("'per-sample' or 'per-window'");
  } else if (key == "smooth_window") cfg.smooth_window = static_cast<int>(as_int());
  else if (key == "stride") cfg.stride = static_cast<int>(as_int());
  else if (key == "markov_order") cfg.markov_order = static_cast<int>(as_int());
  else if (key == "gate_radius") cfg.gate_radius = as_double();
  else if (key == "side_cond_max") cfg.side_cond_max = static_cast<int>(as_int());
  else if (key == "min_overlap") {
    const auto v = as_int();
    if (v < 0) bad("a non-negative integer");
    cfg.min_overlap = static_cast<std::size_t>(v);
  } else if (key == "tau") cfg.tau = as_int();
  else if (key == "beta") cfg.beta = as_double();
  else if (key == "gamma") cfg.gamma = as_double();
  else if (key == "base_filters") cfg.base_filters = parse_filter_list(value);
  else if (key == "max_experts") {
    const auto v = as_int();
    if (v < 0) bad("a non-negative integer");
    cfg.max_experts = static_cast<std::size_t>(v);
  } else if (key == "max_lag") cfg.max_lag = as_int();
  else if (key == "horizon") cfg.horizon = as_int();
  else if (key == "changepoints")
    cfg.changepoints = detail::parse_int_list(value, key);
  else if (key == "levels") cfg.levels = detail::parse_double_list(value, key);
  else if (key == "sigmas") cfg.sigmas = detail::parse_double_list(value, key);
  else if (key == "trials") cfg.trials = as_int();
  else if (key == "seed") {
    std::uint64_t v;
    if (!try_parse_uint(value, v)) bad("an unsigned integer");
    cfg.seed = v;
  } else if (key == "threads") {
    const auto v = as_int();
    if (v < 0) bad("a non-negative integer");
    cfg.threads = static_cast<std::size_t>(v);
  } else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "scene") cfg.scene = value;
  else if (key == "input") cfg.input = value;
  else if (key == "input_format") cfg.input_format = value;
  else if (key == "tracks") cfg.tracks = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

/// Parses a flat key=value config file. '#' lines and blank lines are
/// skipped; keys apply in file order.
inline void apply_config_file(RunConfig& cfg, std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string_view::npos) continue;
    if (line[b] == '#') continue;
    const std::size_t eq = line.find('=', b);
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value");
    auto trim = [](std::string_view s) {
      std::size_t x = s.find_first_not_of(" \t");
      if (x == std::string_view::npos) return std::string();
      std::size_t y = s.find_last_not_of(" \t");
      return std::string(s.substr(x, y - x + 1));
    };
    const std::string key = trim(line.substr(b, eq - b));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_key(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
}

/// Canonical serialization; apply_config_file of the output reproduces the
/// config exactly.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  kv("bandwidth", fmt_double(cfg.bandwidth));
  kv("ridge_rel", fmt_double(cfg.ridge_rel));
  kv("window_mode",
     cfg.window_mode == WindowMode::Offline ? "offline" : "causal");
  kv("center",
     cfg.center == CenterMode::PerSample ? "per-sample" : "per-window");
  kv("smooth_window", fmt_int(cfg.smooth_window));
  kv("stride", fmt_int(cfg.stride));
  kv("markov_order", fmt_int(cfg.markov_order));
  kv("gate_radius", fmt_double(cfg.gate_radius));
  kv("side_cond_max", fmt_int(cfg.side_cond_max));
  kv("min_overlap", fmt_uint(cfg.min_overlap));
  kv("tau", fmt_int(cfg.tau));
  kv("beta", fmt_double(cfg.beta));
  kv("gamma", fmt_double(cfg.gamma));
  kv("base_filters", format_filter_list(cfg.base_filters));
  kv("max_experts", fmt_uint(cfg.max_experts));
  kv("max_lag", fmt_int(cfg.max_lag));
  kv("horizon", fmt_int(cfg.horizon));
  kv("changepoints", detail::join_comma(cfg.changepoints, fmt_int));
  kv("levels", detail::join_comma(cfg.levels, fmt_double));
  kv("sigmas", detail::join_comma(cfg.sigmas, fmt_double));
  kv("trials", fmt_int(cfg.trials));
  kv("seed", fmt_uint(cfg.seed));
  kv("threads", fmt_uint(cfg.threads));
  kv("out_dir", cfg.out_dir);
  kv("scene", cfg.scene);
  kv("input", cfg.input);
  kv("input_format", cfg.input_format);
  kv("tracks", cfg.tracks);
  return out;
}

}  // namespace adi
