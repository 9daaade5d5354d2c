#pragma once

// Expanding fixed-shares ensemble over taper experts. Each expert smooths the
// observed stream with its own taper; weights follow the fixed-shares update
// v_i = w_i e^{-gamma (y_i - x)^2}, w'_i = (1-beta) v_i + (beta/n) sum v,
// renormalized to a probability vector. Every tau samples a fresh copy of the
// base set is spawned, born at the current time.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adi/filters.hpp"

namespace adi {

/// The standard base set: two exponential tapers and one uniform.
inline std::vector<FilterSpec> default_base_filters() {
  return {FilterSpec::exponential(0.1), FilterSpec::exponential(0.2),
          FilterSpec::uniform()};
}

struct EnsembleHyper {
  std::int64_t tau = 10;   // spawn period in samples
  double beta = 0.01;      // share rate in [0, 1]
  double gamma = 1.0;      // loss scale > 0
  std::vector<FilterSpec> base_set = default_base_filters();
  std::size_t max_experts = 0;  // 0 = unbounded

  void validate() const {
    if (tau < 1) throw std::invalid_argument("ensemble: tau must be >= 1");
    if (!(beta >= 0.0) || !(beta <= 1.0))
      throw std::invalid_argument("ensemble: beta must be in [0, 1]");
    if (!(gamma > 0.0))
      throw std::invalid_argument("ensemble: gamma must be > 0");
    if (base_set.empty())
      throw std::invalid_argument("ensemble: base_set must be non-empty");
  }
};

struct ExpertState {
  RunningSmoother smoother;
  double weight = 0.0;

  const FilterSpec& spec() const { return smoother.spec(); }
  std::int64_t birth() const { return smoother.spec().birth; }
  double value() const { return smoother.value(); }
};

struct EnsembleState {
  EnsembleHyper hyper;
  std::vector<ExpertState> experts;
  std::int64_t t0 = 0;             // birth time of the founding experts
  std::int64_t t = 0;              // time of the next sample to absorb
  std::int64_t spawns_skipped = 0; // spawn events suppressed by max_experts

  bool has_absorbed() const { return t > t0; }
  std::size_t size() const { return experts.size(); }
};

inline EnsembleState init_ensemble(const EnsembleHyper& hyper,
                                   std::int64_t t0) {
  hyper.validate();
  EnsembleState state;
  state.hyper = hyper;
  state.t0 = t0;
  state.t = t0;
  const double w = 1.0 / static_cast<double>(hyper.base_set.size());
  state.experts.reserve(hyper.base_set.size());
  for (const auto& spec : hyper.base_set)
    state.experts.push_back({RunningSmoother(spec.reborn(t0)), w});
  return state;
}

/// Weighted mean of the experts' current smoothed values: the ensemble's
/// forecast of the next sample before it is seen.
inline double predict(const EnsembleState& state) {
  if (!state.has_absorbed())
    throw std::logic_error("ensemble predict: no sample absorbed yet");
  double num = 0.0, den = 0.0;
  for (const auto& e : state.experts) {
    num += e.weight * e.value();
    den += e.weight;
  }
  return num / den;
}

/// Fixed-shares weight update on a raw weight/loss pair, returning the
/// renormalized posterior weights. The smallest loss is subtracted before
/// exponentiation; the shift cancels under renormalization and keeps the
/// total away from zero when all losses are large.
inline std::vector<double> share_update_weights(std::span<const double> weights,
                                                std::span<const double> losses,
                                                double beta, double gamma) {
  if (weights.size() != losses.size() || weights.empty())
    throw std::invalid_argument("share_update: weight/loss size mismatch");
  const std::size_t n = weights.size();
  double min_loss = losses[0];
  for (double l : losses)
    if (l < min_loss) min_loss = l;
  std::vector<double> v(n);
  double v_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = weights[i] * std::exp(-gamma * (losses[i] - min_loss));
    v_sum += v[i];
  }
  std::vector<double> out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (1.0 - beta) * v[i] + (beta / static_cast<double>(n)) * v_sum;
    total += out[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    for (auto& w : out) w = 1.0 / static_cast<double>(n);
    return out;
  }
  for (auto& w : out) w /= total;
  return out;
}

/// Applies the fixed-shares update to the ensemble, scoring each expert's
/// current value against the observed sample with squared loss.
inline void share_update(EnsembleState& state, double observed) {
  if (!std::isfinite(observed))
    throw std::domain_error("share_update: observed value not finite");
  if (!state.has_absorbed())
    throw std::logic_error("share_update: experts hold no predictions yet");
  const std::size_t n = state.experts.size();
  std::vector<double> w(n), loss(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = state.experts[i].weight;
    const double d = state.experts[i].value() - observed;
    loss[i] = d * d;
  }
  const auto updated =
      share_update_weights(w, loss, state.hyper.beta, state.hyper.gamma);
  for (std::size_t i = 0; i < n; ++i) state.experts[i].weight = updated[i];
}

inline bool spawn_due(const EnsembleState& state, std::int64_t t) {
  return t > state.t0 && (t - state.t0) % state.hyper.tau == 0;
}

/// Adds one newcomer per base-set template, born at t. Newcomers enter with
/// the pre-spawn mean weight, then the whole vector renormalizes, so each
/// newcomer's share lands at 1/n_new. All-or-nothing under max_experts: if
/// the full batch does not fit, the spawn is skipped and counted.
inline void spawn_experts(EnsembleState& state, std::int64_t t) {
  const std::size_t n_add = state.hyper.base_set.size();
  if (state.hyper.max_experts != 0 &&
      state.experts.size() + n_add > state.hyper.max_experts) {
    ++state.spawns_skipped;
    return;
  }
  double sum = 0.0;
  for (const auto& e : state.experts) sum += e.weight;
  const double mean_w = sum / static_cast<double>(state.experts.size());
  state.experts.reserve(state.experts.size() + n_add);
  for (const auto& spec : state.hyper.base_set)
    state.experts.push_back({RunningSmoother(spec.reborn(t)), mean_w});
  double total = 0.0;
  for (const auto& e : state.experts) total += e.weight;
  for (auto& e : state.experts) e.weight /= total;
}

/// One prequential step on the observed instantaneous value: score and share
/// weights against it, absorb it into every expert, spawn newcomers if the
/// period elapsed (newcomers absorb the same sample as their birth value),
/// and return the weighted ensemble estimate.
inline double step(EnsembleState& state, double observed) {
  if (!std::isfinite(observed))
    throw std::domain_error("ensemble step: observed value not finite");
  const std::int64_t t = state.t;
  if (state.has_absorbed()) share_update(state, observed);
  const std::size_t incumbents = state.experts.size();
  for (auto& e : state.experts) e.smoother.absorb(observed);
  if (spawn_due(state, t)) {
    spawn_experts(state, t);
    for (std::size_t i = incumbents; i < state.experts.size(); ++i)
      state.experts[i].smoother.absorb(observed);
  }
  double num = 0.0, den = 0.0;
  for (const auto& e : state.experts) {
    num += e.weight * e.value();
    den += e.weight;
  }
  state.t = t + 1;
  return num / den;
}

}  // namespace adi
