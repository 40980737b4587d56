#include "mirrortrain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mirrortrain {

double mean(const std::vector<double>& values) {
    if (values.empty()) throw NumericError("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) throw NumericError("variance needs at least two values");
    const double m = mean(values);
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    return acc / static_cast<double>(values.size() - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw NumericError("quantile of an empty sample");
    if (p < 0.0 || p > 1.0) throw NumericError("quantile probability out of range");
    const double rank = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

namespace {

// Continued fraction for the regularized incomplete beta, modified Lentz
// iteration. Converges quickly for x < (a+1)/(a+b+2).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw NumericError("incomplete beta needs positive shape parameters");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
    if (!(df > 0.0)) throw NumericError("t distribution needs positive degrees of freedom");
    if (!std::isfinite(t)) throw NumericError("non-finite t statistic");
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult one_sample_ttest(const std::vector<double>& values, double mu0) {
    if (values.size() < 2) throw NumericError("degenerate sample");
    const double var = sample_variance(values);
    if (var <= 0.0) throw NumericError("degenerate sample");

    TTestResult r;
    r.n = values.size();
    r.mean = mean(values);
    r.sem = std::sqrt(var / static_cast<double>(r.n));
    r.df = static_cast<double>(r.n - 1);
    r.t = (r.mean - mu0) / r.sem;
    r.p = student_t_two_tailed_p(r.t, r.df);
    return r;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("domain", "paired samples differ in length");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return one_sample_ttest(diff, 0.0);
}

IqrFilterResult iqr_outlier_filter(const std::vector<double>& values) {
    IqrFilterResult r;
    if (values.size() < 4) {
        r.kept = values;
        r.applied = false;
        return r;
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    r.q1 = quantile_sorted(sorted, 0.25);
    r.q3 = quantile_sorted(sorted, 0.75);
    const double iqr = r.q3 - r.q1;
    r.lo = r.q1 - 1.5 * iqr;
    r.hi = r.q3 + 1.5 * iqr;
    r.applied = true;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < r.lo || values[i] > r.hi)
            r.removed.push_back(i);
        else
            r.kept.push_back(values[i]);
    }
    return r;
}

}  // namespace mirrortrain
