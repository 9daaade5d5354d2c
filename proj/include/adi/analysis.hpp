#pragma once

// Post-hoc analytics over interaction records: lagged cross-correlation
// affinity between symmetrized series, its chordal distance transform,
// velocity profiles with pairwise angles, and directed label-pair averages.

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adi/parallel.hpp"
#include "adi/pipeline.hpp"

namespace adi {

/// Maximum over integer lags |l| <= max_lag of the Pearson correlation
/// between the two series on that lag's overlap (series re-standardized per
/// lag, so a pure shift scores exactly 1). Lags whose overlap is below
/// min_overlap are skipped; if none survive, the value is missing.
/// Zero-variance overlap on either side scores 0 for that lag.
inline std::optional<double> xcorr_affinity(
    std::span<const std::int64_t> t1, std::span<const double> v1,
    std::span<const std::int64_t> t2, std::span<const double> v2,
    std::int64_t max_lag, std::size_t min_overlap = 20) {
  if (max_lag < 0)
    throw std::invalid_argument("xcorr_affinity: max_lag must be >= 0");
  if (t1.size() != v1.size() || t2.size() != v2.size())
    throw std::invalid_argument("xcorr_affinity: series length mismatch");
  std::optional<double> best;
  for (std::int64_t lag = -max_lag; lag <= max_lag; ++lag) {
    // Overlap of t1 with t2 + lag; both time lists are strictly increasing.
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    std::size_t n = 0;
    std::size_t i = 0, j = 0;
    while (i < t1.size() && j < t2.size()) {
      const std::int64_t a = t1[i], b = t2[j] + lag;
      if (a < b) {
        ++i;
      } else if (b < a) {
        ++j;
      } else {
        sa += v1[i];
        sb += v2[j];
        saa += v1[i] * v1[i];
        sbb += v2[j] * v2[j];
        sab += v1[i] * v2[j];
        ++n;
        ++i;
        ++j;
      }
    }
    if (n < min_overlap) continue;
    const double nd = static_cast<double>(n);
    const double ca = saa - sa * sa / nd;
    const double cb = sbb - sb * sb / nd;
    const double cab = sab - sa * sb / nd;
    double r = 0.0;
    if (ca > 0.0 && cb > 0.0) {
      r = cab / std::sqrt(ca * cb);
      r = std::clamp(r, -1.0, 1.0);
    }
    if (!best || r > *best) best = r;
  }
  return best;
}

struct AffinityMatrix {
  std::vector<std::string> keys;  // scene:actor_i:actor_j per record
  Eigen::MatrixXd a;              // symmetric, unit diagonal
  std::vector<std::uint8_t> valid;  // row-major m*m; 0 where overlap failed

  bool is_valid(std::size_t k, std::size_t l) const {
    return valid[k * keys.size() + l] != 0;
  }
};

inline std::string interaction_key(const InteractionRecord& r) {
  return r.scene + ":" + std::to_string(r.actor_i) + ":" +
         std::to_string(r.actor_j);
}

/// Pairwise affinity between the records' symmetrized series. Records from
/// the same scene align on absolute sample times; records from different
/// scenes are both translated to start at 0 first. Failed entries get 0
/// with the mask cleared; the diagonal is exactly 1.
inline AffinityMatrix affinity_matrix(
    std::span<const InteractionRecord> records, std::int64_t max_lag,
    std::size_t min_overlap = 20, std::size_t threads = 1) {
  if (records.size() < 2)
    throw std::invalid_argument("affinity_matrix: need at least two records");
  const std::size_t m = records.size();
  AffinityMatrix out;
  out.keys.reserve(m);
  for (const auto& r : records) out.keys.push_back(interaction_key(r));
  out.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                static_cast<Eigen::Index>(m));
  out.valid.assign(m * m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    out.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
    out.valid[k * m + k] = 1;
  }

  std::vector<std::pair<std::size_t, std::size_t>> work;
  work.reserve(m * (m - 1) / 2);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l) work.emplace_back(k, l);

  parallel_for(work.size(), threads, [&](std::size_t w) {
    const auto [k, l] = work[w];
    const auto& rk = records[k];
    const auto& rl = records[l];
    std::vector<std::int64_t> tk(rk.times().begin(), rk.times().end());
    std::vector<std::int64_t> tl(rl.times().begin(), rl.times().end());
    if (rk.scene != rl.scene) {
      if (!tk.empty())
        for (auto& t : tk) t -= rk.times().front();
      if (!tl.empty())
        for (auto& t : tl) t -= rl.times().front();
    }
    const auto r = xcorr_affinity(tk, rk.sym, tl, rl.sym, max_lag, min_overlap);
    const auto ki = static_cast<Eigen::Index>(k);
    const auto li = static_cast<Eigen::Index>(l);
    out.a(ki, li) = out.a(li, ki) = r.value_or(0.0);
    out.valid[k * m + l] = out.valid[l * m + k] = r.has_value() ? 1 : 0;
  });
  return out;
}

/// Chordal distance sqrt(2(1-a)) per entry; exact 0 diagonal, 2 at a=-1.
/// Entries outside [-1,1] beyond 1e-9 are rejected.
inline Eigen::MatrixXd to_distance(const AffinityMatrix& A) {
  const Eigen::Index m = A.a.rows();
  Eigen::MatrixXd d(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index l = 0; l < m; ++l) {
      const double a = A.a(k, l);
      if (a < -1.0 - 1e-9 || a > 1.0 + 1e-9)
        throw std::domain_error("to_distance: affinity outside [-1, 1]");
      d(k, l) = k == l ? 0.0 : std::sqrt(2.0 * (1.0 - std::clamp(a, -1.0, 1.0)));
    }
  }
  return d;
}

struct VelocityProfile {
  std::int64_t actor_id = 0;
  std::vector<std::int64_t> times;
  std::vector<double> vx, vy;   // px per sample
  std::vector<double> speed;    // Euclidean magnitude

  std::optional<std::size_t> index_of(std::int64_t t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - times.begin());
  }
};

/// Finite-difference velocities: central differences in the interior
/// (spanning actual time deltas, so sample gaps widen the denominator) and
/// one-sided differences at the ends. Fewer than two samples yield an
/// empty profile.
inline VelocityProfile velocity(const SampledTrack& track) {
  VelocityProfile p;
  p.actor_id = track.actor_id;
  const std::size_t n = track.size();
  if (n < 2) return p;
  p.times = track.times;
  p.vx.resize(n);
  p.vy.resize(n);
  p.speed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    const double dt = static_cast<double>(track.times[hi] - track.times[lo]);
    p.vx[i] = (track.x[hi] - track.x[lo]) / dt;
    p.vy[i] = (track.y[hi] - track.y[lo]) / dt;
    p.speed[i] = std::hypot(p.vx[i], p.vy[i]);
  }
  return p;
}

/// Angle between two velocity vectors in [0, pi]; missing when either is
/// shorter than 1e-6 (direction undefined).
inline std::optional<double> velocity_angle(double vix, double viy,
                                            double vjx, double vjy) {
  const double ni = std::hypot(vix, viy);
  const double nj = std::hypot(vjx, vjy);
  if (ni < 1e-6 || nj < 1e-6) return std::nullopt;
  const double c = std::clamp((vix * vjx + viy * vjy) / (ni * nj), -1.0, 1.0);
  return std::acos(c);
}

struct VelocityRow {
  std::string pair;  // scene:actor_i:actor_j
  std::int64_t t = 0;
  double v_i = 0, v_j = 0;      // speeds
  double total = 0;             // v_i + v_j
  std::optional<double> angle;  // radians, missing if a speed vanishes
};

/// Per-pair velocity table over the gated sample times: both speeds, their
/// sum, and the angle between the velocity vectors.
inline std::vector<VelocityRow> velocity_table(
    std::span<const SampledTrack> tracks, double gate_radius,
    std::size_t min_overlap, const std::string& scene) {
  std::map<std::int64_t, VelocityProfile> profiles;
  for (const auto& tr : tracks) profiles[tr.actor_id] = velocity(tr);
  std::vector<VelocityRow> rows;
  for (const auto& pair : gate_pairs(tracks, gate_radius)) {
    if (pair.times.size() < min_overlap) continue;
    const auto& pi = profiles[pair.actor_a];
    const auto& pj = profiles[pair.actor_b];
    const std::string key = scene + ":" + std::to_string(pair.actor_a) + ":" +
                            std::to_string(pair.actor_b);
    for (const std::int64_t t : pair.times) {
      const auto ii = pi.index_of(t);
      const auto jj = pj.index_of(t);
      if (!ii || !jj) continue;
      VelocityRow row;
      row.pair = key;
      row.t = t;
      row.v_i = pi.speed[*ii];
      row.v_j = pj.speed[*jj];
      row.total = row.v_i + row.v_j;
      row.angle = velocity_angle(pi.vx[*ii], pi.vy[*ii], pj.vx[*jj], pj.vy[*jj]);
      rows.push_back(row);
    }
  }
  return rows;
}

struct TypeMatrix {
  struct Cell {
    std::string from, to;  // display labels
    double mean = 0;
    std::int64_t count = 0;
  };
  std::vector<Cell> cells;  // sorted by (from, to); absent pairs are missing

  const Cell* find(const std::string& from, const std::string& to) const {
    for (const auto& c : cells)
      if (c.from == from && c.to == to) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string trim_label(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string fold_label(const std::string& s) {
  std::string out = trim_label(s);
  for (auto& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Directed label-pair means of the smoothed series, burn-in samples
/// excluded. Labels group case-insensitively after trimming; the first
/// spelling encountered is displayed. Pairs never observed are absent
/// rather than zero.
inline TypeMatrix type_average_matrix(
    std::span<const InteractionRecord> records) {
  struct Acc {
    std::string from, to;
    double sum = 0;
    std::int64_t count = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  auto add = [&](const std::string& from, const std::string& to,
                 const std::vector<double>& adi,
                 const std::vector<std::uint8_t>& burn) {
    const auto key = std::make_pair(detail::fold_label(from),
                                    detail::fold_label(to));
    auto [it, inserted] = acc.try_emplace(key);
    if (inserted) {
      it->second.from = detail::trim_label(from);
      it->second.to = detail::trim_label(to);
    }
    for (std::size_t i = 0; i < adi.size(); ++i) {
      if (burn[i]) continue;
      it->second.sum += adi[i];
      ++it->second.count;
    }
  };
  for (const auto& r : records) {
    add(r.label_i, r.label_j, r.ij.adi, r.burn_in);
    add(r.label_j, r.label_i, r.ji.adi, r.burn_in);
  }
  TypeMatrix out;
  for (const auto& [key, a] : acc) {
    if (a.count == 0) continue;
    out.cells.push_back(
        {a.from, a.to, a.sum / static_cast<double>(a.count), a.count});
  }
  return out;
}

}  // namespace adi
