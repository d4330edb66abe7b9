#include "icc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace icc {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need at least two samples");
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&v](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series");
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    bool const_x = true, const_y = true;
    for (size_t i = 1; i < rx.size(); ++i) {
        if (rx[i] != rx[0]) const_x = false;
        if (ry[i] != ry[0]) const_y = false;
    }
    if (const_x || const_y) throw std::invalid_argument("spearman: constant series");
    // Perfect agreement or reversal is reported as an exact +/-1 so that
    // rank-equivalence checks do not depend on rounding in the sums.
    bool same = true, opposite = true;
    const double flip = static_cast<double>(rx.size()) + 1.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        if (rx[i] != ry[i]) same = false;
        if (rx[i] != flip - ry[i]) opposite = false;
    }
    if (same) return 1.0;
    if (opposite) return -1.0;
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("spearman: constant series");
    return sxy / std::sqrt(sxx * syy);
}

double binomial_stderr(double p, long long n) {
    if (n <= 0) throw std::invalid_argument("binomial_stderr: n must be positive");
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("percentile: empty input");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q outside [0,1]");
    std::sort(v.begin(), v.end());
    const long long n = static_cast<long long>(v.size());
    long long k = static_cast<long long>(std::ceil(q * static_cast<double>(n)));
    if (k < 1) k = 1;
    if (k > n) k = n;
    return v[static_cast<size_t>(k - 1)];
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("log_binomial: k outside [0,n]");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_tail(int n, double p, int k_min) {
    if (k_min <= 0) return 1.0;
    if (k_min > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double acc = 0.0;
    for (int x = k_min; x <= n; ++x)
        acc += std::exp(log_binomial(n, x) + x * std::log(p) + (n - x) * std::log1p(-p));
    return acc > 1.0 ? 1.0 : acc;
}

} // namespace icc
