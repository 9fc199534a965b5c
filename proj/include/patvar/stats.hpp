#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace patvar {

/// (gold, predicted) pairs. Per-label F1 counts 0/0 as 0 and the mean runs
/// over the whole label set, so labels never seen contribute 0.
double macro_f1(const std::vector<std::pair<std::string, std::string>>& predictions,
                const std::vector<std::string>& label_set);

double mean(const std::vector<double>& xs);

/// Sample standard deviation (n - 1 in the denominator); 0 for n < 2.
double sample_sd(const std::vector<double>& xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_p_two_sided(double t, double df);

struct TTestResult {
  double t = 0.0;  // +-infinity when the differences are constant and nonzero
  double p = 1.0;
  std::size_t df = 0;
};

/// Paired t-test on d = a - b. All-zero differences give (0, 1); constant
/// nonzero differences give (+-inf, 0). Throws LengthMismatch, TooFewPairs.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// "+" below .1, "*" below .05, "**" below .01, "***" below .0001.
std::string significance_stars(std::optional<double> p);

}  // namespace patvar
