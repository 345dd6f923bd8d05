#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "crw/stats.hpp"

namespace crw {

// Poisson(mean) weights w_0..w_R with R the first index whose cumulative mass
// reaches 1 - tol. Weights are evaluated in log space so large means do not
// underflow the leading term.
inline std::vector<double> poisson_weights(double mean, double tol) {
  std::vector<double> w;
  if (mean <= 0.0) {
    w.push_back(1.0);
    return w;
  }
  const double log_mean = std::log(mean);
  KahanSum cumulative;
  const double hard_stop = mean + 12.0 * std::sqrt(mean) + 60.0;
  for (std::size_t k = 0;; ++k) {
    const double lw = -mean + static_cast<double>(k) * log_mean - std::lgamma(static_cast<double>(k) + 1.0);
    const double wk = std::exp(lw);
    w.push_back(wk);
    cumulative.add(wk);
    if (static_cast<double>(k) > mean && (cumulative.value() >= 1.0 - tol || static_cast<double>(k) > hard_stop)) break;
  }
  return w;
}

// sum_k w_k K^k v for the uniformized kernel K, where step(in, out) writes
// out = K in (or the transposed action, matching the caller's convention).
// V is any Eigen dense type.
template <class V, class Step>
V uniformize(const V& initial, Step&& step, double rate_bound, double t, double tol) {
  const std::vector<double> w = poisson_weights(rate_bound * t, tol);
  V current = initial;
  V next = initial;
  V result = w[0] * initial;
  for (std::size_t k = 1; k < w.size(); ++k) {
    step(current, next);
    std::swap(current, next);
    result += w[k] * current;
  }
  return result;
}

}  // namespace crw
