#include <algorithm>
#include <cmath>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bahadur_lab {
namespace {

// Polynomials in 1/sqrt(n) correcting the two extreme weights (Royston 1992).
constexpr double kLast[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr double kSecondLast[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};

double poly(const double (&c)[6], double x) {
  double r = c[5];
  for (int i = 4; i >= 0; --i) r = r * x + c[i];
  return r;
}

}  // namespace

ShapiroWilkCoefficients::ShapiroWilkCoefficients(std::size_t n) : a_(n, 0.0) {
  if (n < 3 || n > 5000) {
    throw Unsupported("Shapiro-Wilk weights are available for 3 <= n <= 5000");
  }
  if (n == 3) {
    a_[0] = -std::sqrt(0.5);
    a_[2] = std::sqrt(0.5);
    return;
  }
  const auto nd = static_cast<double>(n);
  std::vector<double> m(n);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = std_normal_quantile((static_cast<double>(i + 1) - 0.375) / (nd + 0.25));
    summ2 += m[i] * m[i];
  }
  const double norm = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(nd);
  const double last = m[n - 1] / norm + poly(kLast, rsn);

  std::size_t fixed = 1;
  double fac = 0.0;
  if (n > 5) {
    const double second = m[n - 2] / norm + poly(kSecondLast, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                    (1.0 - 2.0 * last * last - 2.0 * second * second));
    a_[n - 2] = second;
    a_[1] = -second;
    fixed = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * last * last));
  }
  a_[n - 1] = last;
  a_[0] = -last;
  for (std::size_t i = fixed; i < n - fixed; ++i) a_[i] = m[i] / fac;
}

double shapiro_wilk_w(const Sample& sample, const ShapiroWilkCoefficients& coeffs) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) {
    throw Unsupported("Shapiro-Wilk statistic needs 3 <= n <= 5000");
  }
  if (coeffs.size() != n) throw DomainError("Shapiro-Wilk weights do not match sample size");
  if (sample.constant()) throw DegenerateSample("Shapiro-Wilk statistic of a constant sample");

  const auto a = coeffs.weights();
  double num = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double centred = sample[i] - sample.mean();
    num += a[i] * centred;
    ss += centred * centred;
  }
  const double w = num * num / ss;
  return std::min(w, 1.0);
}

double shapiro_wilk_w(const Sample& sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) {
    throw Unsupported("Shapiro-Wilk statistic needs 3 <= n <= 5000");
  }
  return shapiro_wilk_w(sample, ShapiroWilkCoefficients(n));
}

double shapiro_wilk_statistic(const Sample& sample) { return 1.0 - shapiro_wilk_w(sample); }

}  // namespace bahadur_lab
