#pragma once

// Seeded synthetic track fixtures shared by the unit tests and the
// acceptance runner: a directed leader/follower pair, an independent
// AR(1) null pair, and a frame-level annotation rendering of the
// follower scene for end-to-end CLI runs.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adi/ingest.hpp"
#include "adi/numeric_io.hpp"

namespace fixtures {

// Leader (id 0) random-walks; follower (id 1) sits near the leader's
// previous position. Directed coupling leader -> follower at lag 1.
inline std::vector<adi::SampledTrack> follower_tracks(std::uint64_t seed,
                                                      std::size_t n,
                                                      double step_sd = 3.0,
                                                      double follow_sd = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> lx(n), ly(n), fx(n), fy(n);
  lx[0] = 500.0;
  ly[0] = 500.0;
  for (std::size_t t = 1; t < n; ++t) {
    lx[t] = lx[t - 1] + step_sd * gauss(rng);
    ly[t] = ly[t - 1] + step_sd * gauss(rng);
  }
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t prev = t == 0 ? 0 : t - 1;
    fx[t] = lx[prev] + 15.0 + follow_sd * gauss(rng);
    fy[t] = ly[prev] + follow_sd * gauss(rng);
  }
  std::vector<std::int64_t> times(n);
  for (std::size_t t = 0; t < n; ++t) times[t] = static_cast<std::int64_t>(t);
  adi::SampledTrack leader{0, "Leader", times, lx, ly};
  adi::SampledTrack follower{1, "Follower", times, fx, fy};
  return {leader, follower};
}

// Two AR(1) processes around fixed centers 30 px apart, independent by
// construction; the null case for directionality tests.
inline std::vector<adi::SampledTrack> independent_ar1_tracks(
    std::uint64_t seed, std::size_t n, double rho = 0.7, double innov_sd = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gen = [&](double cx, double cy, std::int64_t id,
                 const std::string& label) {
    std::vector<double> x(n), y(n);
    x[0] = cx;
    y[0] = cy;
    for (std::size_t t = 1; t < n; ++t) {
      x[t] = cx + rho * (x[t - 1] - cx) + innov_sd * gauss(rng);
      y[t] = cy + rho * (y[t - 1] - cy) + innov_sd * gauss(rng);
    }
    std::vector<std::int64_t> times(n);
    for (std::size_t t = 0; t < n; ++t) times[t] = static_cast<std::int64_t>(t);
    return adi::SampledTrack{id, label, times, x, y};
  };
  return {gen(500.0, 500.0, 0, "A"), gen(530.0, 500.0, 1, "B")};
}

// Frame-level annotation text for a leader/follower scene: the follower
// shadows the leader's position frame_lag frames back. With stride ==
// frame_lag the sampled tracks couple at lag 1.
inline std::string follower_annotations(std::uint64_t seed,
                                        std::size_t n_frames,
                                        std::int64_t frame_lag = 10) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> lx(n_frames), ly(n_frames);
  lx[0] = 500.0;
  ly[0] = 500.0;
  for (std::size_t f = 1; f < n_frames; ++f) {
    lx[f] = lx[f - 1] + 1.0 * gauss(rng);
    ly[f] = ly[f - 1] + 1.0 * gauss(rng);
  }
  std::string out;
  auto emit = [&out](std::int64_t id, double cx, double cy, std::int64_t frame,
                     const char* label) {
    const auto x = static_cast<std::int64_t>(std::llround(cx));
    const auto y = static_cast<std::int64_t>(std::llround(cy));
    out += adi::fmt_int(id);
    out += ' ';
    out += adi::fmt_int(x - 5);
    out += ' ';
    out += adi::fmt_int(y - 5);
    out += ' ';
    out += adi::fmt_int(x + 5);
    out += ' ';
    out += adi::fmt_int(y + 5);
    out += ' ';
    out += adi::fmt_int(frame);
    out += " 0 0 0 \"";
    out += label;
    out += "\"\n";
  };
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto frame = static_cast<std::int64_t>(f);
    emit(0, lx[f], ly[f], frame, "Biker");
    const std::size_t src = f < static_cast<std::size_t>(frame_lag)
                                ? 0
                                : f - static_cast<std::size_t>(frame_lag);
    emit(1, lx[src] + 15.0 + 0.5 * gauss(rng), ly[src] + 0.5 * gauss(rng),
         frame, "Pedestrian");
  }
  return out;
}

}  // namespace fixtures
