// Descriptive statistics and the two reference distributions the tests need.
#pragma once

#include <span>
#include <vector>

namespace cyber::stats {

double mean(std::span<const double> x);
// Sample (n - 1) variance and standard deviation.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);
// Pearson correlation; 0 when either side has zero variance.
double correlation(std::span<const double> x, std::span<const double> y);

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> x, double q);

// Mean, standard error and t statistic of a series against zero.
struct MeanTest {
    double mean = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    std::size_t n = 0;
};
MeanTest mean_test(std::span<const double> x);

// Upper tail P(F > x) for F(d1, d2), via the regularized incomplete beta.
double fisher_f_sf(double x, double d1, double d2);
double fisher_f_cdf(double x, double d1, double d2);
// Two-sided p-value of a Student t statistic.
double student_t_two_sided(double t, double df);

}  // namespace cyber::stats
