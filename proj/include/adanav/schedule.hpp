#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "adanav/errors.hpp"
#include "adanav/mdp.hpp"
#include "adanav/rng.hpp"
#include "adanav/spectral.hpp"

namespace adanav {

enum class ScheduleKind { Fixed, RandomUniform, AdaLinear, AdaExponential };

inline std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Fixed: return "fixed";
    case ScheduleKind::RandomUniform: return "random_uniform";
    case ScheduleKind::AdaLinear: return "ada_linear";
    case ScheduleKind::AdaExponential: return "ada_exponential";
  }
  return "?";
}

// Trajectory-length selection rule. The adaptive variants map the current
// policy entropy H_c to a length through a monotone non-increasing function
// anchored at (H_i -> t_i); lengths grow as entropy collapses, up to t_cap.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Fixed;
  int t = 0;        // Fixed
  int t_min = 0;    // RandomUniform
  int t_max = 0;    // RandomUniform
  int t_i = 0;      // AdaLinear, AdaExponential
  double eta = 0.0;    // AdaLinear sensitivity, > 1
  double alpha = 0.0;  // AdaExponential sensitivity, >= 0
  int t_cap = 0;       // hard maximum on every returned length
  double H_i = 0.0;    // reference entropy, captured at training start

  void validate() const {
    if (t_cap < 1) throw ConfigError("schedule: t_cap must be >= 1");
    switch (kind) {
      case ScheduleKind::Fixed:
        if (t < 1 || t > t_cap)
          throw ConfigError("schedule: fixed t must lie in [1, t_cap]");
        break;
      case ScheduleKind::RandomUniform:
        if (t_min < 1 || t_min > t_max || t_max > t_cap)
          throw ConfigError(
              "schedule: random_uniform requires 1 <= t_min <= t_max <= t_cap");
        break;
      case ScheduleKind::AdaLinear:
        if (t_i < 1 || t_i > t_cap)
          throw ConfigError("schedule: t_i must lie in [1, t_cap]");
        if (!(eta > 1.0))
          throw ConfigError("schedule: ada_linear requires eta > 1");
        break;
      case ScheduleKind::AdaExponential:
        if (t_i < 1 || t_i > t_cap)
          throw ConfigError("schedule: t_i must lie in [1, t_cap]");
        if (!(alpha >= 0.0))
          throw ConfigError("schedule: ada_exponential requires alpha >= 0");
        break;
    }
  }

  bool needs_reference_entropy() const {
    return kind == ScheduleKind::AdaLinear || kind == ScheduleKind::AdaExponential;
  }
};

// Reference entropy of the initial policy. The adaptive mappings divide by
// this, so a deterministic initial policy is a configuration error.
inline double capture_reference_entropy(const PolicyTable& policy) {
  const double h = discrete_policy_entropy(policy);
  if (!(h > 0.0))
    throw ConfigError(
        "capture_reference_entropy: initial policy entropy must be positive; "
        "a deterministic initial policy leaves the mapping undefined");
  return h;
}

// round-half-away-from-zero on positive values, then clamp to [1, t_cap].
inline int clamp_round_length(double value, int t_cap) {
  if (!(value < static_cast<double>(t_cap))) return t_cap;  // also catches +inf
  const long long r = std::llround(value);
  return static_cast<int>(std::clamp<long long>(r, 1, t_cap));
}

// Linear map anchored at (H_i -> t_i) and (0 -> eta * t_i).
inline int ada_linear_length(double H_c, int t_i, double eta, double H_i,
                             int t_cap) {
  if (!(H_i > 0.0)) throw ConfigError("ada_linear_length: H_i must be > 0");
  if (!(eta > 1.0)) throw ConfigError("ada_linear_length: eta must be > 1");
  const double r = std::clamp(H_c / H_i, 0.0, 1.0);
  return clamp_round_length(t_i + (1.0 - r) * (eta * t_i - t_i), t_cap);
}

// Exponential map t_i * exp(alpha * (1 - H_c/H_i)); alpha = 0 degenerates to
// the fixed length t_i. The exponent is evaluated before clamping, so large
// alpha saturates at t_cap instead of overflowing.
inline int ada_exponential_length(double H_c, int t_i, double alpha, double H_i,
                                  int t_cap) {
  if (!(H_i > 0.0)) throw ConfigError("ada_exponential_length: H_i must be > 0");
  if (!(alpha >= 0.0))
    throw ConfigError("ada_exponential_length: alpha must be >= 0");
  const double r = std::clamp(H_c / H_i, 0.0, 1.0);
  return clamp_round_length(t_i * std::exp(alpha * (1.0 - r)), t_cap);
}

// Selects the next trajectory length. H_c is consulted only by the adaptive
// variants; the rng only by RandomUniform.
inline int next_length(const ScheduleSpec& spec, double H_c, Rng& rng) {
  switch (spec.kind) {
    case ScheduleKind::Fixed:
      return spec.t;
    case ScheduleKind::RandomUniform:
      return rng.uniform_int(spec.t_min, spec.t_max);
    case ScheduleKind::AdaLinear:
      return ada_linear_length(H_c, spec.t_i, spec.eta, spec.H_i, spec.t_cap);
    case ScheduleKind::AdaExponential:
      return ada_exponential_length(H_c, spec.t_i, spec.alpha, spec.H_i,
                                    spec.t_cap);
  }
  throw std::logic_error("next_length: unknown schedule kind");
}

}  // namespace adanav
