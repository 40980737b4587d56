#pragma once

#include <cstddef>
#include <vector>

#include "mirrortrain/error.hpp"

namespace mirrortrain {

double mean(const std::vector<double>& values);
// Unbiased (n-1) estimator; requires at least two values.
double sample_variance(const std::vector<double>& values);
double median(std::vector<double> values);
// Linear interpolation at rank p*(n-1) over an ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    double mean = 0.0;
    double sem = 0.0;
};

// Throws NumericError("degenerate sample") when the sample cannot support a
// t statistic (fewer than two values, or zero variance).
TTestResult one_sample_ttest(const std::vector<double>& values, double mu0);
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_tailed_p(double t, double df);

struct IqrFilterResult {
    std::vector<double> kept;
    std::vector<std::size_t> removed;  // indices into the input vector
    double q1 = 0.0;
    double q3 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool applied = false;  // stays false when n < 4: too small to filter
};

// Tukey fence filter: drops values outside [q1 - 1.5 iqr, q3 + 1.5 iqr] in a
// single pass. Quartiles come from the original sample only.
IqrFilterResult iqr_outlier_filter(const std::vector<double>& values);

}  // namespace mirrortrain
