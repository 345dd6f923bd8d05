#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace crw {

// Compensated summation; aggregation over replicates goes through this so the
// result is independent of how replicates were distributed across workers.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased sample variance
  double std_error = 0.0;  // sqrt(variance / count)
};

Summary summarize(std::span<const double> xs);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|; ties handled.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS statistic against a continuous CDF; ties in the sample are
// evaluated at the left and right limits of the empirical CDF.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);

struct CovarianceEstimate {
  double covariance = 0.0;
  double std_error = 0.0;  // delete-one jackknife
};

CovarianceEstimate jackknife_covariance(std::span<const double> xs, std::span<const double> ys);

// Half-width of the two-sided 95% Dvoretzky-Kiefer-Wolfowitz band for a
// sample of size n (one-sample) or sizes n, m (two-sample).
double dkw_bound_95(std::size_t n);
double dkw_bound_95(std::size_t n, std::size_t m);

}  // namespace crw
