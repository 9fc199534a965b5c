#include "patvar/stats.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "patvar/error.hpp"

namespace patvar {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double macro_f1(const std::vector<std::pair<std::string, std::string>>& predictions,
                const std::vector<std::string>& label_set) {
  if (predictions.empty()) throw EmptyPredictions();
  if (label_set.empty()) throw PreconditionViolation("macro_f1 needs a non-empty label set");
  std::map<std::string, std::size_t> tp, fp, fn;
  for (const auto& [gold, pred] : predictions) {
    if (gold == pred) {
      ++tp[gold];
    } else {
      ++fp[pred];
      ++fn[gold];
    }
  }
  double total = 0.0;
  for (const auto& label : label_set) {
    const double t = static_cast<double>(tp[label]);
    const double denom = 2.0 * t + static_cast<double>(fp[label]) + static_cast<double>(fn[label]);
    total += denom == 0.0 ? 0.0 : 2.0 * t / denom;
  }
  return total / static_cast<double>(label_set.size());
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_p_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw LengthMismatch("paired samples have sizes " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  if (a.size() < 2) throw TooFewPairs("paired t-test needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.df = d.size() - 1;
  const double m = mean(d);
  const double sd = sample_sd(d);
  if (sd == 0.0) {
    if (m == 0.0) return {0.0, 1.0, r.df};
    r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p = student_t_p_two_sided(r.t, static_cast<double>(r.df));
  return r;
}

std::string significance_stars(std::optional<double> p) {
  if (!p) return "";
  if (*p < 0.0001) return "***";
  if (*p < 0.01) return "**";
  if (*p < 0.05) return "*";
  if (*p < 0.1) return "+";
  return "";
}

}  // namespace patvar
