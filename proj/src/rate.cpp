#include <cmath>
#include <limits>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/errors.hpp"
#include "detail/golden.hpp"

namespace bahadur_lab {

namespace {

double bernoulli_gap(double a, double t) {
  const double upper = (a + t) * std::log1p(a / t);
  const double rest = (1.0 - a) - t;
  if (!(rest > 0.0)) return upper;
  const double ratio = a / (1.0 - t);
  const double lower =
      rest * (ratio < 0.5 ? std::log1p(-ratio) : std::log(rest) - std::log1p(-t));
  return upper + lower;
}

double bernoulli_gap_slope(double a, double t) {
  return std::log(a + t) + std::log1p(-t) - std::log(t) - std::log(1.0 - a - t) -
         a / (t * (1.0 - t));
}

}  // namespace

double ks_rate_G(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("rate argument must lie in [0,1]");
  if (a == 0.0) return 0.0;
  if (a == 1.0) return std::numeric_limits<double>::infinity();

  const double edge = 1.0 - a;
  double lo = 0.0;
  double hi = edge;
  bool bracketed = true;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double d = bernoulli_gap_slope(a, mid);
    if (std::isnan(d)) {
      bracketed = false;
      break;
    }
    (d < 0.0 ? lo : hi) = mid;
  }
  double best = bernoulli_gap(a, edge);
  if (bracketed) {
    for (double t : {lo, hi, 0.5 * (lo + hi)}) {
      if (t > 0.0 && t <= edge) best = std::min(best, bernoulli_gap(a, t));
    }
  }
  if (!bracketed || !std::isfinite(best)) {
    const int n = 20000;
    double t_best = edge;
    for (int i = 1; i <= n; ++i) {
      const double t = edge * i / n;
      const double v = bernoulli_gap(a, t);
      if (v < best) {
        best = v;
        t_best = t;
      }
    }
    const double step = edge / n;
    const auto [t, neg] = detail::golden_max([&](double s) { return -bernoulli_gap(a, s); },
                                             std::max(t_best - step, step * 1e-6),
                                             std::min(t_best + step, edge));
    (void)t;
    best = std::min(best, -neg);
  }
  return std::max(0.0, best);
}

double orlicz_gauge_indicator(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("probability must lie in (0,1]");
  // With x = 1/lambda, solve e^x - x = 1 + 1/p in log form.
  const double target = std::log1p(p) - std::log(p);
  auto g = [&](double x) { return x + std::log1p(-x * std::exp(-x)) - target; };
  double lo = 0.0;
  double hi = target + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double ex = std::exp(-x);
    const double slope = 1.0 + (x - 1.0) * ex / (1.0 - x * ex);
    const double next = x - g(x) / slope;
    if (!(next > lo && next < hi)) break;
    x = next;
  }
  return 1.0 / x;
}

}  // namespace bahadur_lab
