#include "cyberscore/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cyber::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty series");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 observations");
    double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("covariance: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("covariance needs at least 2 observations");
    double mx = mean(x), my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
    double vx = variance(x), vy = variance(y);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return covariance(x, y) / std::sqrt(vx * vy);
}

double percentile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("percentile of empty series");
    if (q < 0.0 || q > 100.0) throw std::invalid_argument("percentile outside [0, 100]");
    std::sort(x.begin(), x.end());
    double pos = q / 100.0 * static_cast<double>(x.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, x.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return x[lo] + frac * (x[hi] - x[lo]);
}

MeanTest mean_test(std::span<const double> x) {
    MeanTest r;
    r.n = x.size();
    r.mean = mean(x);
    if (x.size() < 2) return r;
    r.std_error = stddev(x) / std::sqrt(static_cast<double>(x.size()));
    if (r.std_error > 0.0) {
        r.t_stat = r.mean / r.std_error;
    } else {
        r.t_stat = r.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.mean);
    }
    return r;
}

double fisher_f_cdf(double x, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw std::invalid_argument("F distribution needs positive degrees of freedom");
    if (x <= 0.0) return 0.0;
    double z = d1 * x / (d1 * x + d2);
    return boost::math::ibeta(d1 / 2.0, d2 / 2.0, z);
}

double fisher_f_sf(double x, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw std::invalid_argument("F distribution needs positive degrees of freedom");
    if (x <= 0.0) return 1.0;
    // 1 - I_z(a, b) = I_{1-z}(b, a), computed directly to keep precision in the tail.
    double w = d2 / (d1 * x + d2);
    return boost::math::ibeta(d2 / 2.0, d1 / 2.0, w);
}

double student_t_two_sided(double t, double df) {
    if (df <= 0.0) throw std::invalid_argument("t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    // P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    double w = df / (df + t * t);
    return boost::math::ibeta(df / 2.0, 0.5, w);
}

}  // namespace cyber::stats
