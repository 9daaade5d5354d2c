#pragma once

// Piecewise-constant synthetic experiments: generate noisy step signals,
// run the ensemble over them, and compare the empirical cumulative squared
// error with the closed-form bound
//   (m/gamma) ln n_T - (1/gamma) ln beta^m (1-beta)^(T-m)
//   + (gamma/8) T + m sigma*^2 ln(T/e).
// Times are 1-based here: the first changepoint is 1 by definition.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "adi/ensemble.hpp"
#include "adi/filters.hpp"
#include "adi/parallel.hpp"

namespace adi {

struct PiecewiseSpec {
  std::int64_t T = 1000;
  std::vector<std::int64_t> changepoints = {1};  // segment starts, first is 1
  std::vector<double> levels = {0.0};            // one per segment
  std::vector<double> noise_sd = {0.1};          // one per segment, or one
  std::uint64_t seed = 0;

  std::size_t segments() const { return changepoints.size(); }

  double segment_sd(std::size_t k) const {
    return noise_sd.size() == 1 ? noise_sd[0] : noise_sd[k];
  }

  void validate() const {
    if (T < 1) throw std::invalid_argument("piecewise: T must be >= 1");
    if (changepoints.empty() || changepoints.front() != 1)
      throw std::invalid_argument("piecewise: first changepoint must be 1");
    for (std::size_t i = 1; i < changepoints.size(); ++i)
      if (changepoints[i] <= changepoints[i - 1])
        throw std::invalid_argument(
            "piecewise: changepoints must be strictly increasing");
    if (changepoints.back() > T)
      throw std::invalid_argument("piecewise: changepoint beyond horizon");
    if (levels.size() != changepoints.size())
      throw std::invalid_argument(
          "piecewise: need one level per changepoint");
    if (noise_sd.size() != 1 && noise_sd.size() != changepoints.size())
      throw std::invalid_argument(
          "piecewise: noise_sd must have one entry or one per segment");
    for (double s : noise_sd)
      if (!(s >= 0.0))
        throw std::invalid_argument("piecewise: noise_sd must be >= 0");
    for (double v : levels)
      if (!std::isfinite(v))
        throw std::invalid_argument("piecewise: levels must be finite");
  }
};

/// splitmix64 output stream: the index-th value of the generator seeded
/// with `seed`. Used to derive independent per-trial seeds from one master
/// seed without coupling to the trial schedule.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct PiecewiseSignal {
  std::vector<double> truth;     // theta_t, index 0 holds t=1
  std::vector<double> observed;  // theta_t + eps_t
};

/// Deterministic draw of one noisy piecewise-constant signal. Segments with
/// zero noise copy the truth without consuming randomness.
inline PiecewiseSignal gen_piecewise(const PiecewiseSpec& spec) {
  spec.validate();
  PiecewiseSignal sig;
  sig.truth.resize(static_cast<std::size_t>(spec.T));
  sig.observed.resize(static_cast<std::size_t>(spec.T));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t seg = 0;
  for (std::int64_t t = 1; t <= spec.T; ++t) {
    while (seg + 1 < spec.changepoints.size() &&
           t >= spec.changepoints[seg + 1])
      ++seg;
    const double theta = spec.levels[seg];
    const double sd = spec.segment_sd(seg);
    const std::size_t i = static_cast<std::size_t>(t - 1);
    sig.truth[i] = theta;
    sig.observed[i] = sd == 0.0 ? theta : theta + sd * gauss(rng);
  }
  return sig;
}

/// Running mean of the observations restarted at every changepoint: the
/// comparator the regret bound is stated against.
inline std::vector<double> oracle_mean(
    std::span<const double> observed,
    const std::vector<std::int64_t>& changepoints) {
  if (changepoints.empty() || changepoints.front() != 1)
    throw std::invalid_argument("oracle_mean: first changepoint must be 1");
  const std::int64_t T = static_cast<std::int64_t>(observed.size());
  std::vector<double> u(observed.size());
  std::size_t seg = 0;
  double sum = 0.0;
  std::int64_t seg_start = 1;
  for (std::int64_t t = 1; t <= T; ++t) {
    if (seg + 1 < changepoints.size() && t >= changepoints[seg + 1]) {
      ++seg;
      seg_start = changepoints[seg];
      sum = 0.0;
    }
    sum += observed[static_cast<std::size_t>(t - 1)];
    u[static_cast<std::size_t>(t - 1)] =
        sum / static_cast<double>(t - seg_start + 1);
  }
  return u;
}

/// Cumulative squared error of the estimates minus that of the comparator.
inline double regret(std::span<const double> estimates,
                     std::span<const double> comparator,
                     std::span<const double> truth) {
  if (estimates.size() != comparator.size() ||
      estimates.size() != truth.size())
    throw std::invalid_argument("regret: series lengths differ");
  double r = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double a = estimates[i] - truth[i];
    const double b = comparator[i] - truth[i];
    r += a * a - b * b;
  }
  return r;
}

struct BoundTerms {
  double expert_complexity = 0;  // (m/gamma) ln n_T
  double share_penalty = 0;      // -(1/gamma) ln beta^m (1-beta)^(T-m)
  double loss_scale = 0;         // gamma T / 8
  double oracle_variance = 0;    // m sigma*^2 ln(T/e)

  double regret_bound() const {
    return expert_complexity + share_penalty + loss_scale;
  }
  double total() const { return regret_bound() + oracle_variance; }
  bool finite() const { return std::isfinite(total()); }
};

/// Evaluates the four bound terms. beta at 0 or 1 makes the share penalty
/// infinite (ln 0); that is reported, not raised.
inline BoundTerms mse_bound(std::int64_t m, double gamma, double beta,
                            std::int64_t T, std::int64_t n_t,
                            double sigma_star) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mse_bound: gamma must be > 0");
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("mse_bound: beta must be in [0, 1]");
  if (m < 0 || T <= m) throw std::invalid_argument("mse_bound: need T > m >= 0");
  if (n_t < 1) throw std::invalid_argument("mse_bound: need n_t >= 1");
  if (!(sigma_star >= 0.0))
    throw std::invalid_argument("mse_bound: sigma_star must be >= 0");
  BoundTerms b;
  const double md = static_cast<double>(m);
  const double Td = static_cast<double>(T);
  b.expert_complexity = md / gamma * std::log(static_cast<double>(n_t));
  double ln_shares = 0.0;  // ln beta^m (1-beta)^(T-m), with 0^0 = 1
  if (m > 0) ln_shares += md * std::log(beta);
  if (T - m > 0) ln_shares += (Td - md) * std::log(1.0 - beta);
  b.share_penalty = -ln_shares / gamma;
  b.loss_scale = gamma * Td / 8.0;
  b.oracle_variance = md * sigma_star * sigma_star * (std::log(Td) - 1.0);
  return b;
}

/// Sum over segments of the harmonic numbers of their lengths: the quantity
/// the bound's variance term majorizes.
inline double harmonic_partition_sum(
    const std::vector<std::int64_t>& changepoints, std::int64_t T) {
  double total = 0.0;
  for (std::size_t k = 0; k < changepoints.size(); ++k) {
    const std::int64_t start = changepoints[k];
    const std::int64_t end =
        k + 1 < changepoints.size() ? changepoints[k + 1] - 1 : T;
    for (std::int64_t t = start; t <= end; ++t)
      total += 1.0 / static_cast<double>(t - start + 1);
  }
  return total;
}

/// Feeds an observation series through a fresh ensemble and returns the
/// per-step estimates.
inline std::vector<double> run_ensemble_series(const EnsembleHyper& hyper,
                                               std::span<const double> observed,
                                               std::int64_t t0 = 1) {
  EnsembleState state = init_ensemble(hyper, t0);
  std::vector<double> est;
  est.reserve(observed.size());
  for (double x : observed) est.push_back(step(state, x));
  return est;
}

struct BoundReport {
  PiecewiseSpec spec;
  EnsembleHyper hyper;
  std::int64_t trials = 0;
  std::int64_t n_T = 0;          // realized expert count at the horizon
  double sigma_star = 0;         // largest segment noise sd
  BoundTerms terms;              // evaluated with m = segment count
  double bound = 0;              // terms.total()
  double bound_transitions = 0;  // same bound with m = segments - 1
  double empirical_mean = 0;     // mean over trials of the cumulative
                                 // squared error of the ensemble
  double empirical_stderr = 0;
  bool bound_finite = true;
  bool pass = false;  // empirical_mean + 2 stderr <= bound; vacuous when
                      // the bound is infinite (bound_finite false)
};

/// Monte-Carlo check of the cumulative-MSE bound: `trials` independent
/// signal draws, each run through a fresh ensemble born at t=1. Trial seeds
/// derive from spec.seed by index, so the result is identical for any
/// thread count.
inline BoundReport run_bound_experiment(const PiecewiseSpec& spec,
                                        const EnsembleHyper& hyper,
                                        std::int64_t trials,
                                        std::size_t threads = 1) {
  spec.validate();
  hyper.validate();
  if (trials < 1)
    throw std::invalid_argument("run_bound_experiment: trials must be >= 1");

  std::vector<double> sq_err(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t r) {
    PiecewiseSpec trial_spec = spec;
    trial_spec.seed = derive_seed(spec.seed, r);
    const PiecewiseSignal sig = gen_piecewise(trial_spec);
    EnsembleState state = init_ensemble(hyper, 1);
    double err = 0.0;
    for (std::size_t i = 0; i < sig.observed.size(); ++i) {
      const double est = step(state, sig.observed[i]);
      const double d = est - sig.truth[i];
      err += d * d;
    }
    sq_err[r] = err;
  });

  BoundReport rep;
  rep.spec = spec;
  rep.hyper = hyper;
  rep.trials = trials;
  const std::int64_t spawn_events = (spec.T - 1) / hyper.tau;
  rep.n_T = static_cast<std::int64_t>(hyper.base_set.size()) *
            (1 + spawn_events);
  rep.sigma_star = 0.0;
  for (std::size_t k = 0; k < spec.segments(); ++k)
    rep.sigma_star = std::max(rep.sigma_star, spec.segment_sd(k));

  const auto m_seg = static_cast<std::int64_t>(spec.segments());
  rep.terms = mse_bound(m_seg, hyper.gamma, hyper.beta, spec.T, rep.n_T,
                        rep.sigma_star);
  rep.bound = rep.terms.total();
  rep.bound_transitions =
      m_seg > 1 ? mse_bound(m_seg - 1, hyper.gamma, hyper.beta, spec.T,
                            rep.n_T, rep.sigma_star)
                      .total()
                : rep.bound;
  rep.bound_finite = rep.terms.finite();

  double mean = 0.0;
  for (double e : sq_err) mean += e;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double e : sq_err) var += (e - mean) * (e - mean);
  var = trials > 1 ? var / static_cast<double>(trials - 1) : 0.0;
  rep.empirical_mean = mean;
  rep.empirical_stderr = std::sqrt(var / static_cast<double>(trials));
  rep.pass = !rep.bound_finite ||
             mean + 2.0 * rep.empirical_stderr <= rep.bound;
  return rep;
}

}  // namespace adi
