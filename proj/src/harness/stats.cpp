#include "dime/harness/stats.hpp"

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dime/core/error.hpp"

namespace dime {

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double std_error_of(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

TTestResult paired_t_test_greater(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("paired t-test needs two equal samples, n >= 2");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    TTestResult r;
    r.n = static_cast<int>(d.size());
    r.mean_diff = mean_of(d);
    const double se = std_error_of(d);
    if (se == 0.0) {
        r.t = r.mean_diff > 0 ? INFINITY : (r.mean_diff < 0 ? -INFINITY : 0.0);
        r.p_value = r.mean_diff > 0 ? 0.0 : 1.0;
        return r;
    }
    r.t = r.mean_diff / se;
    boost::math::students_t dist(static_cast<double>(r.n - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
    return r;
}

}  // namespace dime
