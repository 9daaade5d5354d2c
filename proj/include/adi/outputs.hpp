#pragma once

// CSV serialization of every pipeline product. All numbers are written in
// shortest round-trip decimal form, so identical results produce identical
// bytes regardless of thread count or platform locale.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adi/analysis.hpp"
#include "adi/numeric_io.hpp"
#include "adi/pipeline.hpp"
#include "adi/simulate.hpp"

namespace adi {

inline constexpr std::string_view kAdiSeriesHeader =
    "scene,actor_i,actor_j,t,di_inst_ij,adi_ij,di_inst_ji,adi_ji,adi_sym,"
    "burn_in";

inline std::string write_adi_series_csv(
    std::span<const InteractionRecord> records) {
  std::string out{kAdiSeriesHeader};
  out += '\n';
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.times().size(); ++i) {
      out += csv_quote(r.scene);
      out += ',';
      out += fmt_int(r.actor_i);
      out += ',';
      out += fmt_int(r.actor_j);
      out += ',';
      out += fmt_int(r.ij.times[i]);
      out += ',';
      out += fmt_double(r.ij.inst[i]);
      out += ',';
      out += fmt_double(r.ij.adi[i]);
      out += ',';
      out += fmt_double(r.ji.inst[i]);
      out += ',';
      out += fmt_double(r.ji.adi[i]);
      out += ',';
      out += fmt_double(r.sym[i]);
      out += ',';
      out += r.burn_in[i] ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

/// Rebuilds interaction records from the series CSV. Track labels are not
/// part of the format, so label fields come back empty; attach them from a
/// track store when needed.
inline std::vector<InteractionRecord> read_adi_series_csv(
    std::string_view text) {
  std::vector<InteractionRecord> records;
  std::map<std::string, std::size_t> index;
  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kAdiSeriesHeader)
        throw ParseError("unexpected adi series header", line_no);
      saw_header = true;
      continue;
    }
    const auto f = csv_split(line);
    if (f.size() != 10)
      throw ParseError("expected 10 fields, got " + std::to_string(f.size()),
                       line_no);
    std::int64_t ai, aj, t;
    if (!try_parse_int(f[1], ai) || !try_parse_int(f[2], aj) ||
        !try_parse_int(f[3], t))
      throw ParseError("bad integer field", line_no);
    double inst_ij, adi_ij, inst_ji, adi_ji, sym;
    if (!try_parse_double(f[4], inst_ij) || !try_parse_double(f[5], adi_ij) ||
        !try_parse_double(f[6], inst_ji) || !try_parse_double(f[7], adi_ji) ||
        !try_parse_double(f[8], sym))
      throw ParseError("bad numeric field", line_no);
    if (f[9] != "0" && f[9] != "1")
      throw ParseError("burn_in must be 0 or 1", line_no);

    const std::string key =
        f[0] + ":" + std::to_string(ai) + ":" + std::to_string(aj);
    auto [it, inserted] = index.try_emplace(key, records.size());
    if (inserted) {
      InteractionRecord r;
      r.scene = f[0];
      r.actor_i = ai;
      r.actor_j = aj;
      r.ij.src = ai;
      r.ij.dst = aj;
      r.ji.src = aj;
      r.ji.dst = ai;
      records.push_back(std::move(r));
    }
    auto& r = records[it->second];
    if (!r.ij.times.empty() && t <= r.ij.times.back())
      throw ParseError("sample times not strictly increasing for " + key,
                       line_no);
    r.ij.times.push_back(t);
    r.ij.inst.push_back(inst_ij);
    r.ij.adi.push_back(adi_ij);
    r.ij.gated.push_back(1);
    r.ji.times.push_back(t);
    r.ji.inst.push_back(inst_ji);
    r.ji.adi.push_back(adi_ji);
    r.ji.gated.push_back(1);
    r.sym.push_back(sym);
    r.burn_in.push_back(f[9] == "1" ? 1 : 0);
  }
  return records;
}

/// Attaches track-store labels to records read back from CSV.
inline void attach_labels(std::vector<InteractionRecord>& records,
                          std::span<const SampledTrack> tracks) {
  std::map<std::int64_t, const std::string*> labels;
  for (const auto& t : tracks) labels[t.actor_id] = &t.label;
  for (auto& r : records) {
    if (auto it = labels.find(r.actor_i); it != labels.end())
      r.label_i = *it->second;
    if (auto it = labels.find(r.actor_j); it != labels.end())
      r.label_j = *it->second;
  }
}

/// Dense keyed matrix (affinity or distance): header row of keys, then one
/// row per key with the key in the first column.
inline std::string write_matrix_csv(std::span<const std::string> keys,
                                    const Eigen::MatrixXd& m) {
  if (m.rows() != static_cast<Eigen::Index>(keys.size()) || m.rows() != m.cols())
    throw std::invalid_argument("write_matrix_csv: key/matrix shape mismatch");
  std::string out = "key";
  for (const auto& k : keys) {
    out += ',';
    out += csv_quote(k);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += csv_quote(keys[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ',';
      out += fmt_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

inline std::string write_type_matrix_csv(const TypeMatrix& tm) {
  std::string out = "label_from,label_to,mean_adi,count\n";
  for (const auto& c : tm.cells) {
    out += csv_quote(c.from);
    out += ',';
    out += csv_quote(c.to);
    out += ',';
    out += fmt_double(c.mean);
    out += ',';
    out += fmt_int(c.count);
    out += '\n';
  }
  return out;
}

inline std::string write_velocity_csv(std::span<const VelocityRow> rows) {
  std::string out = "pair,t,v_i,v_j,total_velocity,angle\n";
  for (const auto& r : rows) {
    out += csv_quote(r.pair);
    out += ',';
    out += fmt_int(r.t);
    out += ',';
    out += fmt_double(r.v_i);
    out += ',';
    out += fmt_double(r.v_j);
    out += ',';
    out += fmt_double(r.total);
    out += ',';
    if (r.angle) out += fmt_double(*r.angle);
    out += '\n';
  }
  return out;
}

namespace detail {

template <class T, class Fmt>
std::string join_semicolon(const std::vector<T>& v, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace detail

inline std::string write_bound_report_csv(const BoundReport& r) {
  std::string out =
      "T,segments,transitions,changepoints,levels,noise_sd,tau,beta,gamma,"
      "base_filters,max_experts,trials,seed,n_T,sigma_star,"
      "term_expert_complexity,term_share_penalty,term_loss_scale,"
      "term_oracle_variance,bound,bound_transitions,empirical_mse,"
      "empirical_stderr,bound_finite,pass\n";
  out += fmt_int(r.spec.T);
  out += ',';
  out += fmt_int(static_cast<std::int64_t>(r.spec.segments()));
  out += ',';
  out += fmt_int(static_cast<std::int64_t>(r.spec.segments()) - 1);
  out += ',';
  out += detail::join_semicolon(r.spec.changepoints, fmt_int);
  out += ',';
  out += detail::join_semicolon(r.spec.levels, fmt_double);
  out += ',';
  out += detail::join_semicolon(r.spec.noise_sd, fmt_double);
  out += ',';
  out += fmt_int(r.hyper.tau);
  out += ',';
  out += fmt_double(r.hyper.beta);
  out += ',';
  out += fmt_double(r.hyper.gamma);
  out += ',';
  out += csv_quote(format_filter_list(r.hyper.base_set));
  out += ',';
  out += fmt_int(static_cast<std::int64_t>(r.hyper.max_experts));
  out += ',';
  out += fmt_int(r.trials);
  out += ',';
  out += fmt_uint(r.spec.seed);
  out += ',';
  out += fmt_int(r.n_T);
  out += ',';
  out += fmt_double(r.sigma_star);
  out += ',';
  out += fmt_double(r.terms.expert_complexity);
  out += ',';
  out += fmt_double(r.terms.share_penalty);
  out += ',';
  out += fmt_double(r.terms.loss_scale);
  out += ',';
  out += fmt_double(r.terms.oracle_variance);
  out += ',';
  out += fmt_double(r.bound);
  out += ',';
  out += fmt_double(r.bound_transitions);
  out += ',';
  out += fmt_double(r.empirical_mean);
  out += ',';
  out += fmt_double(r.empirical_stderr);
  out += ',';
  out += r.bound_finite ? "true" : "false";
  out += ',';
  out += r.pass ? "true" : "false";
  out += '\n';
  return out;
}

inline std::string render_bound_summary(const BoundReport& r) {
  std::string out;
  out += "cumulative-MSE bound check\n";
  out += "  horizon T=" + fmt_int(r.spec.T) + ", segments=" +
         fmt_int(static_cast<std::int64_t>(r.spec.segments())) + ", trials=" +
         fmt_int(r.trials) + ", experts at T=" + fmt_int(r.n_T) + "\n";
  out += "  bound terms: expert_complexity=" +
         fmt_double(r.terms.expert_complexity) + ", share_penalty=" +
         fmt_double(r.terms.share_penalty) + ",\n               loss_scale=" +
         fmt_double(r.terms.loss_scale) + ", oracle_variance=" +
         fmt_double(r.terms.oracle_variance) + "\n";
  out += "  bound=" + fmt_double(r.bound) + " (segments convention); " +
         fmt_double(r.bound_transitions) + " (transitions convention)\n";
  out += "  empirical MSE=" + fmt_double(r.empirical_mean) + " +/- " +
         fmt_double(r.empirical_stderr) + " (stderr)\n";
  if (!r.bound_finite)
    out += "  bound is infinite (beta at 0 or 1): pass is vacuous\n";
  out += std::string("  result: ") + (r.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace adi
