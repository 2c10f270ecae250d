#pragma once

#include <span>

namespace dime {

double mean_of(std::span<const double> xs);
// Standard error of the mean (sample standard deviation / sqrt(n)).
double std_error_of(std::span<const double> xs);

struct TTestResult {
    int n = 0;
    double mean_diff = 0.0;
    double t = 0.0;
    double p_value = 1.0;  // one-sided, H1: mean(x - y) > 0
};

// Paired one-sided t-test of x against y (same length, n >= 2).
TTestResult paired_t_test_greater(std::span<const double> x, std::span<const double> y);

}  // namespace dime
