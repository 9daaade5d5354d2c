#pragma once

// Per-pair interaction estimation over sampled tracks: proximity gating,
// windowed Gaussian joint modeling, directed and symmetric instantaneous
// information values, and ensemble smoothing into ADI/AMI series.
//
// Directed layout for source -> destination at evaluation time t: the row
// for window time s is
//   [ dst(s) | dst(s-1..s-k) | sides(s-1) | src(s-1..s-k) ]
// with Y the current destination, Z the destination lags plus side actors,
// and X the source lags. Rows missing any required sample are dropped; the
// kernel weights use true time offsets, so gaps do not distort the window.
// Per-sample centering means are computed within the collected rows.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adi/ensemble.hpp"
#include "adi/gaussian_mi.hpp"
#include "adi/ingest.hpp"
#include "adi/parallel.hpp"

namespace adi {

struct PairConfig {
  int markov_order = 1;        // Markov lag depth k
  double gate_radius = 100.0;  // pixels
  int side_cond_max = 3;       // nearby third-party actors conditioned on
  double bandwidth = 5.0;      // kernel bandwidth h, in samples
  double ridge_rel = 1e-6;     // diagonal ridge relative to mean variance
  WindowMode window_mode = WindowMode::Offline;
  CenterMode center = CenterMode::PerSample;
  std::size_t min_overlap = 20;  // gated samples required to keep a pair
  EnsembleHyper hyper;

  void validate() const {
    if (markov_order < 1)
      throw std::invalid_argument("pipeline: markov_order must be >= 1");
    if (!(gate_radius > 0.0))
      throw std::invalid_argument("pipeline: gate_radius must be > 0");
    if (side_cond_max < 0)
      throw std::invalid_argument("pipeline: side_cond_max must be >= 0");
    if (!(bandwidth > 0.0))
      throw std::invalid_argument("pipeline: bandwidth must be > 0");
    if (!(ridge_rel >= 0.0))
      throw std::invalid_argument("pipeline: ridge_rel must be >= 0");
    hyper.validate();
  }

  /// Samples flagged as burn-in at the start of each gated interval.
  std::int64_t burn_in_len() const {
    const auto hb = static_cast<std::int64_t>(std::ceil(bandwidth));
    return std::max<std::int64_t>(markov_order, hb);
  }
};

struct AdiSeries {
  std::int64_t src = 0, dst = 0;
  std::vector<std::int64_t> times;      // strictly increasing
  std::vector<double> inst;             // instantaneous values, nats
  std::vector<double> adi;              // ensemble estimates, nats
  std::vector<std::uint8_t> gated;      // per entry; emitted rows are gated
};

struct InteractionRecord {
  std::string scene;
  std::int64_t actor_i = 0, actor_j = 0;  // actor_i < actor_j
  std::string label_i, label_j;
  AdiSeries ij, ji;               // i->j and j->i, parallel times
  std::vector<double> sym;        // ij.adi + ji.adi
  std::vector<std::uint8_t> burn_in;

  const std::vector<std::int64_t>& times() const { return ij.times; }
  bool empty() const { return ij.times.empty(); }
};

struct AmiSeries {
  std::int64_t actor_i = 0, actor_j = 0;
  std::vector<std::int64_t> times;
  std::vector<double> inst;  // symmetric instantaneous values, nats
  std::vector<double> ami;   // ensemble estimates, nats
};

/// Id-indexed view over a track list; the tracks must outlive it.
class TrackSet {
 public:
  TrackSet() = default;
  explicit TrackSet(std::span<const SampledTrack> tracks) : tracks_(tracks) {
    for (const auto& t : tracks) {
      if (!index_.try_emplace(t.actor_id, &t).second)
        throw std::invalid_argument("duplicate actor id " +
                                    std::to_string(t.actor_id));
    }
  }

  const SampledTrack& by_id(std::int64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw std::invalid_argument("unknown actor id " + std::to_string(id));
    return *it->second;
  }

  std::span<const SampledTrack> all() const { return tracks_; }

 private:
  std::span<const SampledTrack> tracks_;
  std::map<std::int64_t, const SampledTrack*> index_;
};

struct GatedPair {
  std::int64_t actor_a = 0, actor_b = 0;  // actor_a < actor_b
  std::vector<std::int64_t> times;        // both present, within radius
};

namespace detail {

inline std::vector<std::int64_t> gated_times(const SampledTrack& a,
                                             const SampledTrack& b,
                                             double radius) {
  std::vector<std::int64_t> out;
  const bool a_smaller = a.size() <= b.size();
  const SampledTrack& s = a_smaller ? a : b;
  const SampledTrack& t = a_smaller ? b : a;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto j = t.index_of(s.times[i]);
    if (!j) continue;
    const double dx = s.x[i] - t.x[*j];
    const double dy = s.y[i] - t.y[*j];
    if (std::sqrt(dx * dx + dy * dy) <= radius) out.push_back(s.times[i]);
  }
  return out;
}

}  // namespace detail

/// All unordered pairs with at least one sample time where both actors are
/// present within the radius, ordered by actor ids.
inline std::vector<GatedPair> gate_pairs(std::span<const SampledTrack> tracks,
                                         double radius) {
  if (!(radius > 0.0))
    throw std::invalid_argument("gate_pairs: radius must be > 0");
  std::vector<const SampledTrack*> sorted;
  sorted.reserve(tracks.size());
  for (const auto& t : tracks) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const SampledTrack* a, const SampledTrack* b) {
              return a->actor_id < b->actor_id;
            });
  std::vector<GatedPair> pairs;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      auto times = detail::gated_times(*sorted[i], *sorted[j], radius);
      if (times.empty()) continue;
      pairs.push_back(
          {sorted[i]->actor_id, sorted[j]->actor_id, std::move(times)});
    }
  }
  return pairs;
}

namespace detail {

// One (track, lag) pair contributes the track's position at s - lag as two
// columns of the row for window time s.
struct RowTerm {
  const SampledTrack* track;
  std::int64_t lag;
};

struct WindowData {
  Eigen::MatrixXd X;
  Eigen::VectorXd offsets;  // row time minus evaluation time
  bool has_center = false;  // a row for the evaluation time itself exists
};

inline WindowData collect_rows(const std::vector<RowTerm>& terms,
                               std::int64_t t, double h, WindowMode mode) {
  const std::int64_t r = kernel_support_radius(h);
  const std::int64_t lo = t - r;
  const std::int64_t hi = mode == WindowMode::Causal ? t : t + r;
  const auto D = static_cast<Eigen::Index>(2 * terms.size());

  std::vector<double> rows;
  std::vector<double> offs;
  for (std::int64_t s = lo; s <= hi; ++s) {
    bool ok = true;
    std::vector<std::size_t> idx(terms.size());
    for (std::size_t q = 0; q < terms.size(); ++q) {
      const auto i = terms[q].track->index_of(s - terms[q].lag);
      if (!i) {
        ok = false;
        break;
      }
      idx[q] = *i;
    }
    if (!ok) continue;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      rows.push_back(terms[q].track->x[idx[q]]);
      rows.push_back(terms[q].track->y[idx[q]]);
    }
    offs.push_back(static_cast<double>(s - t));
  }

  WindowData w;
  const auto n = static_cast<Eigen::Index>(offs.size());
  w.X.resize(n, D);
  w.offsets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w.offsets(i) = offs[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < D; ++c)
      w.X(i, c) = rows[static_cast<std::size_t>(i) * static_cast<std::size_t>(D) +
                       static_cast<std::size_t>(c)];
    if (w.offsets(i) == 0.0) w.has_center = true;
  }
  return w;
}

// Nearest third-party actors at t-1: present there, within the gate radius
// of either endpoint, ranked by that distance with ids breaking ties.
inline std::vector<const SampledTrack*> side_actors(const TrackSet& ts,
                                                    const SampledTrack& a,
                                                    const SampledTrack& b,
                                                    std::int64_t t,
                                                    const PairConfig& cfg) {
  if (cfg.side_cond_max == 0) return {};
  const auto ia = a.index_of(t - 1);
  const auto ib = b.index_of(t - 1);
  if (!ia || !ib) return {};
  struct Cand {
    double dist;
    std::int64_t id;
    const SampledTrack* track;
  };
  std::vector<Cand> cands;
  for (const auto& q : ts.all()) {
    if (q.actor_id == a.actor_id || q.actor_id == b.actor_id) continue;
    const auto iq = q.index_of(t - 1);
    if (!iq) continue;
    const double dax = q.x[*iq] - a.x[*ia], day = q.y[*iq] - a.y[*ia];
    const double dbx = q.x[*iq] - b.x[*ib], dby = q.y[*iq] - b.y[*ib];
    const double d = std::min(std::sqrt(dax * dax + day * day),
                              std::sqrt(dbx * dbx + dby * dby));
    if (d <= cfg.gate_radius) cands.push_back({d, q.actor_id, &q});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return x.dist != y.dist ? x.dist < y.dist : x.id < y.id;
  });
  if (cands.size() > static_cast<std::size_t>(cfg.side_cond_max))
    cands.resize(static_cast<std::size_t>(cfg.side_cond_max));
  std::vector<const SampledTrack*> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.track);
  return out;
}

inline Eigen::MatrixXd window_cov(const WindowData& w, const PairConfig& cfg,
                                  std::int64_t t) {
  try {
    Eigen::MatrixXd cov =
        kernel_cov_at(w.X, w.offsets, cfg.bandwidth, 0.0, cfg.center);
    const double mean_var = cov.trace() / static_cast<double>(cov.rows());
    cov.diagonal().array() += cfg.ridge_rel * mean_var + 1e-12;
    return cov;
  } catch (const NumericalError& e) {
    throw e.at_time(t);
  }
}

inline IndexSet iota_set(int begin, int count) {
  IndexSet s(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) s[static_cast<std::size_t>(i)] = begin + i;
  return s;
}

}  // namespace detail

/// Instantaneous directed information value from src to dst at time t, or
/// nothing when the window cannot be assembled (missing history or fewer
/// than two usable rows). Side actors are chosen at t-1 and held fixed for
/// the whole window.
inline std::optional<double> instantaneous_di(const TrackSet& ts,
                                              std::int64_t src,
                                              std::int64_t dst,
                                              std::int64_t t,
                                              const PairConfig& cfg) {
  cfg.validate();
  const SampledTrack& s = ts.by_id(src);
  const SampledTrack& d = ts.by_id(dst);
  const int k = cfg.markov_order;

  const auto sides = detail::side_actors(ts, s, d, t, cfg);
  std::vector<detail::RowTerm> terms;
  terms.push_back({&d, 0});
  for (int l = 1; l <= k; ++l) terms.push_back({&d, l});
  for (const auto* q : sides) terms.push_back({q, 1});
  for (int l = 1; l <= k; ++l) terms.push_back({&s, l});

  const auto w = detail::collect_rows(terms, t, cfg.bandwidth, cfg.window_mode);
  if (!w.has_center || w.X.rows() < 2) return std::nullopt;

  const Eigen::MatrixXd cov = detail::window_cov(w, cfg, t);
  const IndexSet Y = detail::iota_set(0, 2);
  const IndexSet Z = detail::iota_set(2, 2 * k + 2 * static_cast<int>(sides.size()));
  const IndexSet X =
      detail::iota_set(2 + 2 * k + 2 * static_cast<int>(sides.size()), 2 * k);
  try {
    return gaussian_cmi(cov, X, Y, Z);
  } catch (const NumericalError& e) {
    throw e.at_time(t);
  }
}

/// Symmetric instantaneous value: information between the two current
/// positions given both actors' lag histories. No side conditioning.
inline std::optional<double> instantaneous_ami(const TrackSet& ts,
                                               std::int64_t a, std::int64_t b,
                                               std::int64_t t,
                                               const PairConfig& cfg) {
  cfg.validate();
  const SampledTrack& ta = ts.by_id(a);
  const SampledTrack& tb = ts.by_id(b);
  const int k = cfg.markov_order;

  std::vector<detail::RowTerm> terms;
  terms.push_back({&ta, 0});
  terms.push_back({&tb, 0});
  for (int l = 1; l <= k; ++l) terms.push_back({&ta, l});
  for (int l = 1; l <= k; ++l) terms.push_back({&tb, l});

  const auto w = detail::collect_rows(terms, t, cfg.bandwidth, cfg.window_mode);
  if (!w.has_center || w.X.rows() < 2) return std::nullopt;

  const Eigen::MatrixXd cov = detail::window_cov(w, cfg, t);
  const IndexSet X = detail::iota_set(0, 2);
  const IndexSet Y = detail::iota_set(2, 2);
  const IndexSet Z = detail::iota_set(4, 4 * k);
  try {
    return gaussian_cmi(cov, X, Y, Z);
  } catch (const NumericalError& e) {
    throw e.at_time(t);
  }
}

/// Both directed series for one pair. A sample time is emitted only when
/// both directions produced a value there; each direction's ensemble steps
/// once per emitted sample (its clock is the emission index, so gaps in
/// gating do not advance it). The first burn_in_len() emitted samples of
/// each contiguous gated interval are flagged.
inline InteractionRecord compute_adi_series(const TrackSet& ts,
                                            std::int64_t a, std::int64_t b,
                                            const PairConfig& cfg) {
  cfg.validate();
  InteractionRecord rec;
  rec.actor_i = std::min(a, b);
  rec.actor_j = std::max(a, b);
  const SampledTrack& ti = ts.by_id(rec.actor_i);
  const SampledTrack& tj = ts.by_id(rec.actor_j);
  rec.label_i = ti.label;
  rec.label_j = tj.label;
  rec.ij.src = rec.actor_i;
  rec.ij.dst = rec.actor_j;
  rec.ji.src = rec.actor_j;
  rec.ji.dst = rec.actor_i;

  const auto gated = detail::gated_times(ti, tj, cfg.gate_radius);
  if (gated.size() < cfg.min_overlap) return rec;

  std::optional<EnsembleState> ens_ij, ens_ji;
  const std::int64_t burn = cfg.burn_in_len();
  std::int64_t emitted_in_run = 0;
  for (std::size_t g = 0; g < gated.size(); ++g) {
    const std::int64_t t = gated[g];
    if (g > 0 && gated[g - 1] != t - 1) emitted_in_run = 0;
    const auto di_ij = instantaneous_di(ts, rec.actor_i, rec.actor_j, t, cfg);
    const auto di_ji = instantaneous_di(ts, rec.actor_j, rec.actor_i, t, cfg);
    if (!di_ij || !di_ji) continue;
    if (!ens_ij) {
      ens_ij = init_ensemble(cfg.hyper, 0);
      ens_ji = init_ensemble(cfg.hyper, 0);
    }
    const double adi_ij = step(*ens_ij, *di_ij);
    const double adi_ji = step(*ens_ji, *di_ji);
    rec.ij.times.push_back(t);
    rec.ij.inst.push_back(*di_ij);
    rec.ij.adi.push_back(adi_ij);
    rec.ij.gated.push_back(1);
    rec.ji.times.push_back(t);
    rec.ji.inst.push_back(*di_ji);
    rec.ji.adi.push_back(adi_ji);
    rec.ji.gated.push_back(1);
    rec.sym.push_back(adi_ij + adi_ji);
    rec.burn_in.push_back(emitted_in_run < burn ? 1 : 0);
    ++emitted_in_run;
  }
  return rec;
}

/// Ensemble-smoothed symmetric series for one pair, same gating and
/// emission rules as compute_adi_series.
inline AmiSeries compute_ami_series(const TrackSet& ts, std::int64_t a,
                                    std::int64_t b, const PairConfig& cfg) {
  cfg.validate();
  AmiSeries out;
  out.actor_i = std::min(a, b);
  out.actor_j = std::max(a, b);
  const SampledTrack& ti = ts.by_id(out.actor_i);
  const SampledTrack& tj = ts.by_id(out.actor_j);

  const auto gated = detail::gated_times(ti, tj, cfg.gate_radius);
  if (gated.size() < cfg.min_overlap) return out;

  std::optional<EnsembleState> ens;
  for (const std::int64_t t : gated) {
    const auto v = instantaneous_ami(ts, out.actor_i, out.actor_j, t, cfg);
    if (!v) continue;
    if (!ens) ens = init_ensemble(cfg.hyper, 0);
    out.times.push_back(t);
    out.inst.push_back(*v);
    out.ami.push_back(step(*ens, *v));
  }
  return out;
}

/// Runs every gated pair with enough overlap through compute_adi_series.
/// The pair workload is a deterministic parallel map; records come back
/// ordered by actor ids regardless of thread count.
inline std::vector<InteractionRecord> run_pipeline(
    std::span<const SampledTrack> tracks, const PairConfig& cfg,
    const std::string& scene, std::size_t threads = 1) {
  cfg.validate();
  const TrackSet ts(tracks);
  auto pairs = gate_pairs(tracks, cfg.gate_radius);
  std::erase_if(pairs, [&](const GatedPair& p) {
    return p.times.size() < cfg.min_overlap;
  });
  std::vector<InteractionRecord> records(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    records[i] =
        compute_adi_series(ts, pairs[i].actor_a, pairs[i].actor_b, cfg);
    records[i].scene = scene;
  });
  std::erase_if(records,
                [](const InteractionRecord& r) { return r.empty(); });
  return records;
}

}  // namespace adi
