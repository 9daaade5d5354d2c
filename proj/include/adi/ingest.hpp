#pragma once

// Annotation-file ingest: parse drone-footage style track annotations into
// per-actor tracks, smooth the bounding-box centers with a moving mean, and
// subsample to the working rate.
//
// Line format, whitespace separated, label double-quoted:
//   track_id xmin ymin xmax ymax frame lost occluded generated "label"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adi/numeric_io.hpp"

namespace adi {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct TrackObservation {
  std::int64_t frame = 0;
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  bool lost = false, occluded = false, generated = false;

  double cx() const { return (xmin + xmax) / 2.0; }
  double cy() const { return (ymin + ymax) / 2.0; }

  bool operator==(const TrackObservation&) const = default;
};

struct Track {
  std::int64_t actor_id = 0;
  std::string label;
  std::vector<TrackObservation> obs;  // frames strictly increasing

  bool operator==(const Track&) const = default;
};

struct SampledTrack {
  std::int64_t actor_id = 0;
  std::string label;
  std::vector<std::int64_t> times;  // strictly increasing, frame/stride units
  std::vector<double> x, y;         // parallel to times, pixels

  std::size_t size() const { return times.size(); }

  /// Index of sample time t, if present.
  std::optional<std::size_t> index_of(std::int64_t t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return std::nullopt;
    return static_cast<std::size_t>(it - times.begin());
  }
};

namespace detail {

inline bool parse_flag(std::string_view tok, const char* name,
                       std::size_t line) {
  if (tok == "0") return false;
  if (tok == "1") return true;
  throw ParseError(std::string(name) + " flag must be 0 or 1, got '" +
                       std::string(tok) + "'",
                   line);
}

inline double parse_coord(std::string_view tok, const char* name,
                          std::size_t line) {
  double v;
  if (!try_parse_double(tok, v) || !std::isfinite(v))
    throw ParseError(std::string(name) + " is not a finite number: '" +
                         std::string(tok) + "'",
                     line);
  return v;
}

inline std::int64_t parse_index(std::string_view tok, const char* name,
                                std::size_t line) {
  std::int64_t v;
  if (!try_parse_int(tok, v))
    throw ParseError(std::string(name) + " is not an integer: '" +
                         std::string(tok) + "'",
                     line);
  return v;
}

}  // namespace detail

/// Parses annotation text into tracks sorted by actor id. Malformed lines
/// raise ParseError carrying the 1-based line number; empty input yields an
/// empty list.
inline std::vector<Track> parse_annotations(std::string_view text) {
  struct Pending {
    TrackObservation obs;
    std::size_t line;
  };
  std::map<std::int64_t, std::vector<Pending>> by_id;
  std::map<std::int64_t, std::pair<std::string, std::size_t>> labels;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::size_t quote = line.find('"');
    if (quote == std::string_view::npos)
      throw ParseError("label must be double-quoted", line_no);
    const std::size_t endq = line.find('"', quote + 1);
    if (endq == std::string_view::npos)
      throw ParseError("unterminated quoted label", line_no);
    if (line.find_first_not_of(" \t", endq + 1) != std::string_view::npos)
      throw ParseError("unexpected text after label", line_no);
    const std::string label(line.substr(quote + 1, endq - quote - 1));

    std::vector<std::string_view> tok;
    std::string_view head = line.substr(0, quote);
    std::size_t i = 0;
    while (i < head.size()) {
      while (i < head.size() && (head[i] == ' ' || head[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < head.size() && head[j] != ' ' && head[j] != '\t') ++j;
      if (j > i) tok.push_back(head.substr(i, j - i));
      i = j;
    }
    if (tok.size() != 9)
      throw ParseError("expected 9 numeric fields before the label, got " +
                           std::to_string(tok.size()),
                       line_no);

    const std::int64_t id = detail::parse_index(tok[0], "track_id", line_no);
    TrackObservation o;
    o.xmin = detail::parse_coord(tok[1], "xmin", line_no);
    o.ymin = detail::parse_coord(tok[2], "ymin", line_no);
    o.xmax = detail::parse_coord(tok[3], "xmax", line_no);
    o.ymax = detail::parse_coord(tok[4], "ymax", line_no);
    o.frame = detail::parse_index(tok[5], "frame", line_no);
    o.lost = detail::parse_flag(tok[6], "lost", line_no);
    o.occluded = detail::parse_flag(tok[7], "occluded", line_no);
    o.generated = detail::parse_flag(tok[8], "generated", line_no);

    auto [it, inserted] = labels.try_emplace(id, label, line_no);
    if (!inserted && it->second.first != label)
      throw ParseError("track " + std::to_string(id) +
                           " changes label from '" + it->second.first +
                           "' to '" + label + "'",
                       line_no);
    by_id[id].push_back({o, line_no});
  }

  std::vector<Track> tracks;
  tracks.reserve(by_id.size());
  for (auto& [id, pending] : by_id) {
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) {
                       return a.obs.frame < b.obs.frame;
                     });
    Track tr;
    tr.actor_id = id;
    tr.label = labels.at(id).first;
    tr.obs.reserve(pending.size());
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (k > 0 && pending[k].obs.frame == pending[k - 1].obs.frame)
        throw ParseError("duplicate frame " +
                             std::to_string(pending[k].obs.frame) +
                             " for track " + std::to_string(id),
                         pending[k].line);
      tr.obs.push_back(pending[k].obs);
    }
    tracks.push_back(std::move(tr));
  }
  return tracks;
}

/// Canonical annotation serialization: one line per observation, tracks
/// ordered by actor id, observations by frame. Parsing the output
/// reproduces the tracks exactly.
inline std::string serialize_annotations(const std::vector<Track>& tracks) {
  std::string out;
  for (const auto& tr : tracks) {
    for (const auto& o : tr.obs) {
      out += fmt_int(tr.actor_id);
      out += ' ';
      out += fmt_double(o.xmin);
      out += ' ';
      out += fmt_double(o.ymin);
      out += ' ';
      out += fmt_double(o.xmax);
      out += ' ';
      out += fmt_double(o.ymax);
      out += ' ';
      out += fmt_int(o.frame);
      out += ' ';
      out += o.lost ? '1' : '0';
      out += ' ';
      out += o.occluded ? '1' : '0';
      out += ' ';
      out += o.generated ? '1' : '0';
      out += " \"";
      out += tr.label;
      out += "\"\n";
    }
  }
  return out;
}

/// Centered moving mean over bounding-box centers. Lost observations are
/// dropped from both averaging and output, and they split the track into
/// independently smoothed segments, as do frame gaps. The nominal window
/// [i-r, i+r] is clipped at segment boundaries. Box size is preserved; only
/// the center moves.
inline Track smooth_track(const Track& track, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("smooth_track: window must be odd and >= 1");
  const int r = (window - 1) / 2;
  Track out;
  out.actor_id = track.actor_id;
  out.label = track.label;

  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end)
  std::size_t i = 0;
  const auto& obs = track.obs;
  while (i < obs.size()) {
    if (obs[i].lost) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < obs.size() && !obs[j].lost &&
           obs[j].frame == obs[j - 1].frame + 1)
      ++j;
    runs.emplace_back(i, j);
    i = j;
  }

  for (auto [b, e] : runs) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(e - b);
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const std::ptrdiff_t lo = k - r < 0 ? 0 : k - r;
      const std::ptrdiff_t hi = k + r >= n ? n - 1 : k + r;
      double sx = 0, sy = 0;
      for (std::ptrdiff_t q = lo; q <= hi; ++q) {
        sx += obs[b + static_cast<std::size_t>(q)].cx();
        sy += obs[b + static_cast<std::size_t>(q)].cy();
      }
      const double m = static_cast<double>(hi - lo + 1);
      TrackObservation o = obs[b + static_cast<std::size_t>(k)];
      const double w = o.xmax - o.xmin, h = o.ymax - o.ymin;
      const double cx = sx / m, cy = sy / m;
      o.xmin = cx - w / 2.0;
      o.xmax = cx + w / 2.0;
      o.ymin = cy - h / 2.0;
      o.ymax = cy + h / 2.0;
      out.obs.push_back(o);
    }
  }
  return out;
}

/// Keeps non-lost observations on frames divisible by stride and re-indexes
/// time as frame/stride. Missing frames stay missing; no interpolation.
inline SampledTrack sample_track(const Track& track, int stride) {
  if (stride < 1)
    throw std::invalid_argument("sample_track: stride must be >= 1");
  SampledTrack s;
  s.actor_id = track.actor_id;
  s.label = track.label;
  for (const auto& o : track.obs) {
    if (o.lost || o.frame % stride != 0) continue;
    s.times.push_back(o.frame / stride);
    s.x.push_back(o.cx());
    s.y.push_back(o.cy());
  }
  return s;
}

/// Removes every maximal run of consecutive sample times shorter than
/// min_len samples.
inline SampledTrack drop_short_spans(const SampledTrack& track,
                                     std::size_t min_len) {
  SampledTrack out;
  out.actor_id = track.actor_id;
  out.label = track.label;
  std::size_t i = 0;
  while (i < track.times.size()) {
    std::size_t j = i + 1;
    while (j < track.times.size() &&
           track.times[j] == track.times[j - 1] + 1)
      ++j;
    if (j - i >= min_len) {
      for (std::size_t k = i; k < j; ++k) {
        out.times.push_back(track.times[k]);
        out.x.push_back(track.x[k]);
        out.y.push_back(track.y[k]);
      }
    }
    i = j;
  }
  return out;
}

/// Full ingest chain for one track: smooth, subsample, drop fragments too
/// short to carry the Markov history.
inline SampledTrack prepare_track(const Track& track, int smooth_window,
                                  int stride, std::size_t min_span) {
  return drop_short_spans(sample_track(smooth_track(track, smooth_window), stride),
                          min_span);
}

/// Writes the canonical per-scene track store: header exactly
/// actor_id,label,sample_t,x,y.
inline std::string write_track_csv(const std::vector<SampledTrack>& tracks) {
  std::string out = "actor_id,label,sample_t,x,y\n";
  for (const auto& tr : tracks) {
    for (std::size_t i = 0; i < tr.size(); ++i) {
      out += fmt_int(tr.actor_id);
      out += ',';
      out += csv_quote(tr.label);
      out += ',';
      out += fmt_int(tr.times[i]);
      out += ',';
      out += fmt_double(tr.x[i]);
      out += ',';
      out += fmt_double(tr.y[i]);
      out += '\n';
    }
  }
  return out;
}

/// Reads the canonical track store back; inverse of write_track_csv.
inline std::vector<SampledTrack> read_track_csv(std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  std::map<std::int64_t, SampledTrack> by_id;
  bool saw_header = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = csv_split(line);
    if (!saw_header) {
      if (fields != std::vector<std::string>{"actor_id", "label", "sample_t",
                                             "x", "y"})
        throw ParseError("expected header actor_id,label,sample_t,x,y",
                         line_no);
      saw_header = true;
      continue;
    }
    if (fields.size() != 5)
      throw ParseError("expected 5 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    std::int64_t id, t;
    double x, y;
    if (!try_parse_int(fields[0], id))
      throw ParseError("bad actor_id '" + fields[0] + "'", line_no);
    if (!try_parse_int(fields[2], t))
      throw ParseError("bad sample_t '" + fields[2] + "'", line_no);
    if (!try_parse_double(fields[3], x) || !try_parse_double(fields[4], y) ||
        !std::isfinite(x) || !std::isfinite(y))
      throw ParseError("bad position", line_no);
    auto& tr = by_id[id];
    if (tr.times.empty()) {
      tr.actor_id = id;
      tr.label = fields[1];
    } else {
      if (tr.label != fields[1])
        throw ParseError("track " + std::to_string(id) + " changes label",
                         line_no);
      if (t <= tr.times.back())
        throw ParseError("sample times not strictly increasing for track " +
                             std::to_string(id),
                         line_no);
    }
    tr.times.push_back(t);
    tr.x.push_back(x);
    tr.y.push_back(y);
  }
  std::vector<SampledTrack> tracks;
  tracks.reserve(by_id.size());
  for (auto& [id, tr] : by_id) tracks.push_back(std::move(tr));
  return tracks;
}

}  // namespace adi
