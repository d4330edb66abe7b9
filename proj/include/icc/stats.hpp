#pragma once

#include <vector>

namespace icc {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Standard error of a binomial proportion estimate.
double binomial_stderr(double p, long long n);

/// Empirical percentile via the order statistic at ceil(q * n), 1-based.
double percentile(std::vector<double> v, double q);

/// log C(n, k) via lgamma.
double log_binomial(int n, int k);

/// P(Binomial(n, p) >= k_min).
double binomial_tail(int n, double p, int k_min);

} // namespace icc
