#include "crw/stats.hpp"

#include <algorithm>
#include <cmath>

#include "crw/error.hpp"

namespace crw {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  KahanSum sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    KahanSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.variance = sq.value() / static_cast<double>(xs.size() - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(xs.size()));
  }
  return s;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySamples, "ks_two_sample needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw Error(ErrorCode::EmptySamples, "ks_one_sample on empty input");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    const double v = xs[i];
    const double below = static_cast<double>(i) / n;
    while (i < xs.size() && xs[i] == v) ++i;
    const double at = static_cast<double>(i) / n;
    const double f = cdf(v);
    d = std::max({d, std::abs(f - below), std::abs(f - at)});
  }
  return d;
}

CovarianceEstimate jackknife_covariance(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 3 || ys.size() != n) throw Error(ErrorCode::EmptySamples, "jackknife needs >= 3 paired samples");
  KahanSum sx, sy, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    sx.add(xs[i]);
    sy.add(ys[i]);
    sxy.add(xs[i] * ys[i]);
  }
  const double N = static_cast<double>(n);
  auto cov_from = [](double x, double y, double xy, double m) {
    return (xy - x * y / m) / (m - 1.0);
  };
  CovarianceEstimate out;
  out.covariance = cov_from(sx.value(), sy.value(), sxy.value(), N);
  // Leave-one-out replicates in closed form.
  KahanSum loo_sum;
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    loo[i] = cov_from(sx.value() - xs[i], sy.value() - ys[i], sxy.value() - xs[i] * ys[i], N - 1.0);
    loo_sum.add(loo[i]);
  }
  const double loo_mean = loo_sum.value() / N;
  KahanSum dev;
  for (double v : loo) dev.add((v - loo_mean) * (v - loo_mean));
  out.std_error = std::sqrt((N - 1.0) / N * dev.value());
  return out;
}

double dkw_bound_95(std::size_t n) {
  return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(n)));
}

double dkw_bound_95(std::size_t n, std::size_t m) {
  const double eff = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
  return std::sqrt(std::log(2.0 / 0.05) / (2.0 * eff));
}

}  // namespace crw
