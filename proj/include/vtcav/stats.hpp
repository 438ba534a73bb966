#pragma once

#include <vector>

namespace vtcav {

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

// Welch's unequal-variance two-sample t-test, two-sided.
// Both samples zero-variance with equal means -> p = 1; unequal means -> p = 0.
WelchResult welch_ttest(const std::vector<double>& a, const std::vector<double>& b);

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

}  // namespace vtcav
