#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "detail/golden.hpp"
#include "detail/weighted_density.hpp"

namespace bahadur_lab {

namespace {

constexpr std::size_t kScanProbabilities = 4000;
constexpr std::size_t kRefineTop = 16;
// Beyond |t| = 37 the normal tails underflow.
constexpr double kTailClip = 37.0;

std::vector<double> probability_grid() {
  std::vector<double> p;
  p.reserve(kScanProbabilities + 32);
  for (std::size_t j = 1; j <= kScanProbabilities; ++j) {
    p.push_back(static_cast<double>(j) / static_cast<double>(kScanProbabilities + 1));
  }
  for (int k = 4; k <= 15; ++k) {
    const double e = std::pow(10.0, -k);
    p.push_back(e);
    p.push_back(1.0 - e);
  }
  return p;
}

// Smallest x with F(x) >= p, by bracketing and bisection.
double cdf_quantile(const CdfFn& f, double p) {
  double lo = -1.0;
  double hi = 1.0;
  while (f(lo) >= p && lo > -1e300) lo *= 2.0;
  while (f(hi) < p && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 2200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) >= p ? hi : lo) = mid;
  }
  return hi;
}

SupPoint scan_sup(const std::function<double(double)>& g, std::vector<double> pts) {
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](double x) { return !std::isfinite(x); }),
            pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) return {0.0, 0.0};

  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = g(pts[i]);

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool left = i == 0 || vals[i] >= vals[i - 1];
    const bool right = i + 1 == pts.size() || vals[i] >= vals[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t x, std::size_t y) {
    return vals[x] != vals[y] ? vals[x] > vals[y] : x < y;
  });
  if (peaks.size() > kRefineTop) peaks.resize(kRefineTop);

  SupPoint best{pts[peaks.front()], vals[peaks.front()]};
  for (std::size_t i : peaks) {
    const double lo = pts[i == 0 ? 0 : i - 1];
    const double hi = pts[std::min(i + 1, pts.size() - 1)];
    if (!(hi > lo)) continue;
    const auto [x, v] = detail::golden_max(g, lo, hi, 1e-15);
    if (v > best.value) best = {x, v};
  }
  return best;
}

struct Standardized {
  AlternativeSpec spec;
  double mu;
  double sigma;

  explicit Standardized(const AlternativeSpec& s) : spec(s) {
    const auto m = s.moments();
    mu = m.mean;
    sigma = m.sd;
  }
  double cdf(double t) const { return spec.cdf(mu + sigma * t); }
  double to_t(double x) const { return (x - mu) / sigma; }
};

}  // namespace

SupPoint sup_discrepancy_point(const CdfFn& f, const CdfFn& f0) {
  const auto probs = probability_grid();
  std::vector<double> pts;
  pts.reserve(2 * probs.size());
  for (double p : probs) {
    pts.push_back(cdf_quantile(f, p));
    pts.push_back(cdf_quantile(f0, p));
  }
  return scan_sup([&](double t) { return std::fabs(f(t) - f0(t)); }, std::move(pts));
}

double sup_discrepancy_simple(const CdfFn& f, const CdfFn& f0) {
  return std::min(1.0, sup_discrepancy_point(f, f0).value);
}

SlopeEstimate ks_slope(const CdfFn& f, const CdfFn& f0) {
  const double d = sup_discrepancy_simple(f, f0);
  return SlopeEstimate::make(d, ks_rate_G(d), SlopeEstimate::Kind::Exact);
}

SlopeEstimate ks_slope(const AlternativeSpec& spec) {
  const auto f = [spec](double x) { return spec.cdf(x); };
  const auto probs = probability_grid();
  std::vector<double> pts;
  pts.reserve(2 * probs.size() + 2);
  for (double p : probs) {
    pts.push_back(spec.quantile(p));
    pts.push_back(std_normal_quantile(p));
  }
  const auto [lo, hi] = spec.support();
  pts.push_back(lo);
  pts.push_back(hi);
  const double sup =
      std::min(1.0, scan_sup([&](double t) { return std::fabs(f(t) - std_normal_cdf(t)); },
                             std::move(pts))
                        .value);
  return SlopeEstimate::make(sup, ks_rate_G(sup), SlopeEstimate::Kind::Exact);
}

SupPoint lilliefors_discrepancy_point(const AlternativeSpec& spec, const WeightFunction& psi) {
  if (!psi.bounded()) throw DomainError("the sup discrepancy needs a bounded weight");
  const Standardized s(spec);
  const auto probs = probability_grid();
  std::vector<double> pts;
  pts.reserve(2 * probs.size() + psi.knots().size() + 2);
  for (double p : probs) {
    pts.push_back(s.to_t(spec.quantile(p)));
    pts.push_back(std_normal_quantile(p));
  }
  const auto [lo, hi] = spec.support();
  pts.push_back(s.to_t(lo));
  pts.push_back(s.to_t(hi));
  for (double k : psi.knots()) pts.push_back(k);
  return scan_sup([&](double t) { return std::fabs(s.cdf(t) - std_normal_cdf(t)) * psi(t); },
                  std::move(pts));
}

double lilliefors_discrepancy(const AlternativeSpec& spec, const WeightFunction& psi) {
  return lilliefors_discrepancy_point(spec, psi).value;
}

double ad_discrepancy(const AlternativeSpec& spec, const WeightFunction& psi) {
  const Standardized s(spec);
  auto density = [&](double t) { return detail::weighted_normal_density(psi, t); };
  auto integrand = [&](double t) {
    const double d = s.cdf(t) - std_normal_cdf(t);
    return d * d * density(t);
  };

  std::vector<double> cuts{-kTailClip, kTailClip, 0.0};
  const auto [lo, hi] = spec.support();
  for (double x : {lo, hi}) {
    const double t = s.to_t(x);
    if (std::isfinite(t) && std::fabs(t) < kTailClip) cuts.push_back(t);
  }
  for (double k : psi.knots()) {
    if (k > 0.0 && k < 1.0) cuts.push_back(std_normal_quantile(k));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    total += Quad::integrate(integrand, cuts[i], cuts[i + 1], 25, 1e-13, &err);
    error += err * std::max(1.0, 0.5 * (cuts[i + 1] - cuts[i]));
  }
  if (!std::isfinite(total) || error > 1e-10) {
    throw NumericalFailure("discrepancy quadrature did not converge (value " +
                           std::to_string(total) + ", error estimate " + std::to_string(error) +
                           ")");
  }
  return total;
}

}  // namespace bahadur_lab
