#pragma once

// Closed-form evaluation of the analytical guarantees, for cross-checking
// simulated runs: the regret bound, the per-worker quality-assessment bound,
// the local-storage bound, and the partial-sum bound on Dirichlet series.
// Logs are natural throughout.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mcsel::bounds {

struct BoundInputs {
  long horizon = 10000;           // T
  int workers = 100;              // W
  double q_max = 5.0;
  double alpha = 1.0;             // smoothness exponent, in (0,1]
  double hoelder_constant = 5.0;  // L
  std::vector<int> dims;          // D_i per worker; a single entry applies to all
};

inline void validate(const BoundInputs& in) {
  if (in.horizon < 1) throw std::invalid_argument("BoundInputs: horizon must be >= 1");
  if (in.workers < 1) throw std::invalid_argument("BoundInputs: workers must be >= 1");
  if (!(in.q_max > 0.0)) throw std::invalid_argument("BoundInputs: q_max must be positive");
  if (!(in.alpha > 0.0) || in.alpha > 1.0)
    throw std::invalid_argument("BoundInputs: alpha must be in (0,1]");
  if (!(in.hoelder_constant > 0.0))
    throw std::invalid_argument("BoundInputs: hoelder_constant must be positive");
  if (in.dims.empty()) throw std::invalid_argument("BoundInputs: dims must be non-empty");
  for (int d : in.dims)
    if (d < 1) throw std::invalid_argument("BoundInputs: dims must be >= 1");
}

struct RegretBreakdown {
  double exploration = 0.0;    // q_max W sum_i 2^D (ln T * T^((2a+D)/(3a+D)) + T^(D/(3a+D)))
  double estimation = 0.0;     // sum_i 2 q_max / ((2a+D)/(3a+D)) * T^((2a+D)/(3a+D))
  double tail = 0.0;           // q_max W^2 pi^2 / 3
  double approximation = 0.0;  // 2 sum_i L D^(a/2) T^((2a+D)/(3a+D))
  double total = 0.0;
};

inline RegretBreakdown regret_bound(const BoundInputs& in) {
  validate(in);
  const double T = static_cast<double>(in.horizon);
  const double log_T = std::log(T);
  RegretBreakdown out;
  auto dim_of = [&](int i) {
    return in.dims.size() == 1 ? in.dims[0] : in.dims[static_cast<std::size_t>(i)];
  };
  if (in.dims.size() != 1 && static_cast<int>(in.dims.size()) != in.workers)
    throw std::invalid_argument("regret_bound: dims must have 1 or W entries");
  for (int i = 0; i < in.workers; ++i) {
    const double D = dim_of(i);
    const double lead_exp = (2.0 * in.alpha + D) / (3.0 * in.alpha + D);
    const double lead = std::pow(T, lead_exp);
    out.exploration += in.q_max * in.workers * std::pow(2.0, D) *
                       (log_T * lead + std::pow(T, D / (3.0 * in.alpha + D)));
    out.estimation += 2.0 * in.q_max / lead_exp * lead;
    out.approximation += 2.0 * in.hoelder_constant * std::pow(D, in.alpha / 2.0) * lead;
  }
  out.tail = in.q_max * in.workers * static_cast<double>(in.workers) *
             std::numbers::pi * std::numbers::pi / 3.0;
  out.total = out.exploration + out.estimation + out.tail + out.approximation;
  return out;
}

// A_i(T) <= (1 + T^(1/(3a+D)))^D * (1 + ln(T) T^(2a/(3a+D))).
inline double assessment_bound(long horizon, double alpha, int dims) {
  if (horizon < 1) throw std::invalid_argument("assessment_bound: horizon must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("assessment_bound: alpha must be in (0,1]");
  if (dims < 1) throw std::invalid_argument("assessment_bound: dims must be >= 1");
  const double T = static_cast<double>(horizon);
  const double denom = 3.0 * alpha + dims;
  return std::pow(1.0 + std::pow(T, 1.0 / denom), static_cast<double>(dims)) *
         (1.0 + std::log(T) * std::pow(T, 2.0 * alpha / denom));
}

// Same bound with the exploration factor f folded into the threshold term; the
// counting argument behind the bound is linear in the control function.
inline double assessment_bound_scaled(long horizon, double alpha, int dims, double factor) {
  if (!(factor > 0.0) || factor > 1.0)
    throw std::invalid_argument("assessment_bound_scaled: factor must be in (0,1]");
  const double T = static_cast<double>(horizon);
  const double denom = 3.0 * alpha + dims;
  return std::pow(1.0 + std::pow(T, 1.0 / denom), static_cast<double>(dims)) *
         (1.0 + factor * std::log(T) * std::pow(T, 2.0 * alpha / denom));
}

// Scalars stored by one local controller: 2 (1 + T^(1/(3a+D)))^D.
inline double storage_bound(long horizon, double alpha, int dims) {
  if (horizon < 1) throw std::invalid_argument("storage_bound: horizon must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("storage_bound: alpha must be in (0,1]");
  if (dims < 1) throw std::invalid_argument("storage_bound: dims must be >= 1");
  const double T = static_cast<double>(horizon);
  return 2.0 * std::pow(1.0 + std::pow(T, 1.0 / (3.0 * alpha + dims)), static_cast<double>(dims));
}

// sum_{t=1..T} t^-p <= 1 + (T^(1-p) - 1) / (1 - p), for p > 0, p != 1.
inline double dirichlet_partial_bound(double p, long horizon) {
  if (!(p > 0.0)) throw std::invalid_argument("dirichlet_partial_bound: p must be positive");
  if (p == 1.0) throw std::invalid_argument("dirichlet_partial_bound: p = 1 not covered");
  if (horizon < 1) throw std::invalid_argument("dirichlet_partial_bound: horizon must be >= 1");
  const double T = static_cast<double>(horizon);
  return 1.0 + (std::pow(T, 1.0 - p) - 1.0) / (1.0 - p);
}

}  // namespace mcsel::bounds
