#pragma once

// Causal taper filters over time-indexed series. A taper g(t, T; t0) weights
// sample t when smoothing up to time T; it is zero before its birth time t0
// and its weights over [t0, T] normalize to a probability vector.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adi/numeric_io.hpp"

namespace adi {

enum class FilterKind { Exponential, Uniform };

/// A taper template: kind plus parameters. Exponential tapers decay by the
/// forgetting rate alpha away from the current time; uniform tapers weight
/// every sample since birth equally.
struct FilterSpec {
  FilterKind kind = FilterKind::Uniform;
  double alpha = 0.0;      // forgetting rate in (0, 1], Exponential only
  std::int64_t birth = 0;  // first time index with nonzero weight

  static FilterSpec exponential(double alpha, std::int64_t birth = 0) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
      throw std::invalid_argument("exponential taper: alpha must be in (0, 1]");
    return FilterSpec{FilterKind::Exponential, alpha, birth};
  }
  static FilterSpec uniform(std::int64_t birth = 0) {
    return FilterSpec{FilterKind::Uniform, 0.0, birth};
  }

  FilterSpec reborn(std::int64_t new_birth) const {
    FilterSpec s = *this;
    s.birth = new_birth;
    return s;
  }
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("exponential taper: alpha must be in (0, 1]");
}

/// Unnormalized exponential weight alpha*(1-alpha)^(T-t); zero outside [t0, T].
inline double exp_filter_weight(double alpha, std::int64_t t, std::int64_t T,
                                std::int64_t t0) {
  check_alpha(alpha);
  if (t < t0 || t > T) return 0.0;
  return alpha * std::pow(1.0 - alpha, static_cast<double>(T - t));
}

/// Uniform weight 1/(T - t0 + 1) on [t0, T]; zero outside.
inline double uniform_filter_weight(std::int64_t t, std::int64_t T,
                                    std::int64_t t0) {
  if (T < t0)
    throw std::invalid_argument("uniform taper: window end precedes birth");
  if (t < t0 || t > T) return 0.0;
  return 1.0 / static_cast<double>(T - t0 + 1);
}

inline double filter_weight(const FilterSpec& spec, std::int64_t t,
                            std::int64_t T) {
  switch (spec.kind) {
    case FilterKind::Exponential:
      return exp_filter_weight(spec.alpha, t, T, spec.birth);
    case FilterKind::Uniform:
      return uniform_filter_weight(t, T, spec.birth);
  }
  throw std::logic_error("unknown filter kind");
}

/// Normalized taper weights over [t0, T] (sums to 1). Exponential weights are
/// truncated at birth and renormalized by their truncated sum, so tapers of
/// different ages output values on the same scale.
inline std::vector<double> normalized_weights(const FilterSpec& spec,
                                              std::int64_t T) {
  if (T < spec.birth)
    throw std::invalid_argument("normalized_weights: window end precedes birth");
  const std::size_t n = static_cast<std::size_t>(T - spec.birth + 1);
  std::vector<double> w(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = filter_weight(spec, spec.birth + static_cast<std::int64_t>(i), T);
    sum += w[i];
  }
  for (auto& x : w) x /= sum;
  return w;
}

/// Taper-weighted value of a series whose first element sits at the filter's
/// birth time. Weights are the normalized ones of normalized_weights.
inline double smoothed_value(const FilterSpec& spec,
                             std::span<const double> series) {
  if (series.empty())
    throw std::domain_error("smoothed_value: empty series");
  const std::int64_t T =
      spec.birth + static_cast<std::int64_t>(series.size()) - 1;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double w =
        filter_weight(spec, spec.birth + static_cast<std::int64_t>(i), T);
    num += w * series[i];
    den += w;
  }
  return num / den;
}

/// One unnormalized exponential smoothing step: alpha*x + (1-alpha)*prev.
inline double exp_recursive_update(double prev, double x, double alpha) {
  check_alpha(alpha);
  return alpha * x + (1.0 - alpha) * prev;
}

/// Canonical string form: "exp:ALPHA" or "unif" (birth not included; it is
/// runtime state, not part of the template).
inline std::string format_filter(const FilterSpec& spec) {
  return spec.kind == FilterKind::Exponential ? "exp:" + fmt_double(spec.alpha)
                                              : std::string("unif");
}

inline FilterSpec parse_filter(std::string_view text) {
  if (text == "unif") return FilterSpec::uniform();
  if (text.substr(0, 4) == "exp:") {
    double alpha;
    if (!try_parse_double(text.substr(4), alpha))
      throw std::invalid_argument("bad filter alpha in '" + std::string(text) +
                                  "'");
    return FilterSpec::exponential(alpha);
  }
  throw std::invalid_argument("bad filter spec '" + std::string(text) +
                              "' (expected exp:ALPHA or unif)");
}

inline std::string format_filter_list(std::span<const FilterSpec> specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) out += ',';
    out += format_filter(specs[i]);
  }
  return out;
}

inline std::vector<FilterSpec> parse_filter_list(std::string_view text) {
  std::vector<FilterSpec> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const auto item = text.substr(pos, comma - pos);
    if (!item.empty()) out.push_back(parse_filter(item));
    pos = comma + 1;
  }
  if (out.empty())
    throw std::invalid_argument("empty filter list");
  return out;
}

/**
 * Incremental evaluator of a taper's normalized smoothed value. Absorbing
 * x_{t0}, ..., x_T reproduces smoothed_value over the same samples exactly:
 * for the exponential kind both the weighted sum and the truncated weight
 * mass follow the same recursion, so the ratio stays the batch value at
 * every step.
 */
class RunningSmoother {
 public:
  explicit RunningSmoother(FilterSpec spec) : spec_(spec) {
    if (spec.kind == FilterKind::Exponential) check_alpha(spec.alpha);
  }

  void absorb(double x) {
    switch (spec_.kind) {
      case FilterKind::Exponential:
        weighted_sum_ = spec_.alpha * x + (1.0 - spec_.alpha) * weighted_sum_;
        weight_mass_ = spec_.alpha + (1.0 - spec_.alpha) * weight_mass_;
        break;
      case FilterKind::Uniform:
        ++count_;
        mean_ += (x - mean_) / static_cast<double>(count_);
        break;
    }
    absorbed_ = true;
  }

  bool has_value() const { return absorbed_; }

  double value() const {
    if (!absorbed_)
      throw std::logic_error("RunningSmoother::value before any sample");
    return spec_.kind == FilterKind::Exponential ? weighted_sum_ / weight_mass_
                                                 : mean_;
  }

  const FilterSpec& spec() const { return spec_; }

 private:
  FilterSpec spec_;
  bool absorbed_ = false;
  double weighted_sum_ = 0.0;  // exponential numerator
  double weight_mass_ = 0.0;   // exponential truncated weight sum
  double mean_ = 0.0;          // uniform running mean
  std::int64_t count_ = 0;
};

}  // namespace adi
