#include "bahadur_lab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "detail/golden.hpp"

namespace bahadur_lab {
namespace {

std::vector<double> transform_sorted(const Sample& sample, const CdfFn& cdf) {
  std::vector<double> u(sample.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = cdf(sample[i]);
  return u;
}

// Extra samples of psi needed by the sup scan: the tails only need to reach
// the outermost knot because psi is constant beyond it.
double left_reach(const WeightFunction& psi, double first_jump) {
  return psi.kind() == WeightFunction::Kind::Table ? std::min(psi.knots().front(), first_jump)
                                                    : first_jump;
}

double right_reach(const WeightFunction& psi, double last_jump) {
  return psi.kind() == WeightFunction::Kind::Table ? std::max(psi.knots().back(), last_jump)
                                                    : last_jump;
}

// integral over [a, b] of (c - u)^2.
double unit_piece(double c, double a, double b) {
  const double ea = a - c;
  const double eb = b - c;
  return (eb * eb * eb - ea * ea * ea) / 3.0;
}

// integral over [a, b] of (c - u)^2 / (u (1 - u)), with lower tails a, b and
// upper tails a_up = 1 - a, b_up = 1 - b supplied separately. Uses
// (c - u)^2 / (u (1 - u)) = -1 + c^2 / u + (1 - c)^2 / (1 - u).
double ad_piece(double c, double a, double b, double a_up, double b_up) {
  double value = -(b - a);
  if (c > 0.0) value += c * c * std::log(b / a);
  if (c < 1.0) value -= (1.0 - c) * (1.0 - c) * std::log(b_up / a_up);
  return value;
}

// integral over [a, b] of (c - u)^2 psi(u) for a table weight; psi is linear
// between knots so the integrand is a cubic there and 3-point Gauss-Legendre
// is exact on each linear piece.
double table_piece(const WeightFunction& psi, double c, double a, double b) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double k : psi.knots()) {
    if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  constexpr double nodes[] = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
  constexpr double weights[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double total = 0.0;
  for (std::size_t s = 1; s < cuts.size(); ++s) {
    const double mid = 0.5 * (cuts[s] + cuts[s - 1]);
    const double half = 0.5 * (cuts[s] - cuts[s - 1]);
    for (int q = 0; q < 3; ++q) {
      const double u = mid + half * nodes[q];
      total += half * weights[q] * (c - u) * (c - u) * psi(u);
    }
  }
  return total;
}

}  // namespace

double ks_from_uniforms(std::span<const double> u) {
  const auto n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto rank = static_cast<double>(i + 1);
    d = std::max({d, rank / n - u[i], u[i] - (rank - 1.0) / n});
  }
  return d;
}

double cvm_from_uniforms(std::span<const double> u) {
  const auto n = static_cast<double>(u.size());
  double s = 1.0 / (12.0 * n);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = u[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n);
    s += e * e;
  }
  return s / n;
}

double ad_from_tails(std::span<const double> u, std::span<const double> upper) {
  if (u.size() != upper.size() || u.empty()) {
    throw DomainError("ad_from_tails: tail arrays must be nonempty and of equal length");
  }
  const std::size_t n = u.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = u[i];
    const double up = upper[n - 1 - i];
    if (!(lo > 0.0) || !(up > 0.0)) {
      throw DegenerateTail("null CDF saturated at an observation; AD statistic is infinite");
    }
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(lo) + std::log(up));
  }
  const auto nd = static_cast<double>(n);
  return -1.0 - s / (nd * nd);
}

double ad_from_uniforms(std::span<const double> u) {
  std::vector<double> upper(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) upper[i] = 1.0 - u[i];
  return ad_from_tails(u, upper);
}

double ks_statistic(const Sample& sample, const CdfFn& null_cdf) {
  return ks_from_uniforms(transform_sorted(sample, null_cdf));
}

double cvm_statistic(const Sample& sample, const CdfFn& null_cdf) {
  return cvm_from_uniforms(transform_sorted(sample, null_cdf));
}

double ad_statistic(const Sample& sample, const CdfFn& null_cdf) {
  const auto u = transform_sorted(sample, null_cdf);
  for (double v : u) {
    if (!(v > 0.0 && v < 1.0)) {
      throw DegenerateTail("null CDF saturated at an observation; AD statistic is infinite");
    }
  }
  return ad_from_uniforms(u);
}

double anderson_darling_a2(const Sample& sample, const CdfFn& null_cdf) {
  return static_cast<double>(sample.size()) * ad_statistic(sample, null_cdf);
}

BoundedValue lilliefors_statistic_bounded(const Sample& sample, const WeightFunction& psi,
                                          const LillieforsOptions& options) {
  if (!psi.bounded()) throw Unsupported("lilliefors statistic needs a bounded weight");
  const auto z = sample.studentized();
  const std::size_t n = z.size();
  const auto nd = static_cast<double>(n);

  // Both one-sided limits at every jump.
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std_normal_cdf(z[i]);
    const auto rank = static_cast<double>(i + 1);
    const double gap = std::max(std::fabs(rank / nd - p), std::fabs(p - (rank - 1.0) / nd));
    best = std::max(best, gap * psi(z[i]));
  }
  if (psi.kind() == WeightFunction::Kind::Unit) return {best, 0.0};

  // Between jumps F_n is constant at k/n; scan each piece between jumps and
  // weight knots, then refine the best grid point by golden section.
  const std::size_t grid = std::max<std::size_t>(options.grid_points, 2);
  double widest_cell = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double level = static_cast<double>(k) / nd;
    const double lo = k == 0 ? left_reach(psi, z.front()) : z[k - 1];
    const double hi = k == n ? right_reach(psi, z.back()) : z[k];
    if (!(hi > lo)) continue;
    std::vector<double> cuts{lo};
    for (double knot : psi.knots()) {
      if (knot > lo && knot < hi) cuts.push_back(knot);
    }
    cuts.push_back(hi);
    auto objective = [&](double t) { return std::fabs(level - std_normal_cdf(t)) * psi(t); };
    for (std::size_t s = 1; s < cuts.size(); ++s) {
      const double a = cuts[s - 1];
      const double b = cuts[s];
      const double h = (b - a) / static_cast<double>(grid - 1);
      widest_cell = std::max(widest_cell, h);
      std::size_t arg = 0;
      double local = -1.0;
      for (std::size_t g = 0; g < grid; ++g) {
        const double v = objective(a + h * static_cast<double>(g));
        if (v > local) {
          local = v;
          arg = g;
        }
      }
      const double ga = a + h * static_cast<double>(arg == 0 ? 0 : arg - 1);
      const double gb = std::min(b, a + h * static_cast<double>(arg + 1));
      const auto [x, v] = detail::golden_max(objective, ga, gb);
      (void)x;
      best = std::max({best, local, v});
    }
  }
  // |d/dt (c - Phi) psi| <= phi_max sup psi + Lip(psi).
  const double slope_bound = kInvSqrt2Pi * psi.supremum() + psi.max_slope();
  return {best, slope_bound * widest_cell};
}

double lilliefors_statistic(const Sample& sample, const WeightFunction& psi) {
  return lilliefors_statistic_bounded(sample, psi).value;
}

double weighted_cvm_statistic(const Sample& sample, const WeightFunction& psi) {
  const auto z = sample.studentized();
  const std::size_t n = z.size();
  const auto nd = static_cast<double>(n);

  // Breakpoints v_k = Phi(z_k) with v_0 = 0, v_{n+1} = 1; upper tails kept
  // separately for the log terms.
  std::vector<double> lo(n + 2);
  std::vector<double> up(n + 2);
  lo[0] = 0.0;
  up[0] = 1.0;
  lo[n + 1] = 1.0;
  up[n + 1] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo[i + 1] = std_normal_cdf(z[i]);
    up[i + 1] = std_normal_survival(z[i]);
  }

  double total = 0.0;
  switch (psi.kind()) {
    case WeightFunction::Kind::Unit:
      for (std::size_t k = 0; k <= n; ++k) {
        total += unit_piece(static_cast<double>(k) / nd, lo[k], lo[k + 1]);
      }
      break;
    case WeightFunction::Kind::AndersonDarling:
      for (std::size_t i = 1; i <= n; ++i) {
        if (!(lo[i] > 0.0) || !(up[i] > 0.0)) {
          throw DegenerateTail("standard normal CDF saturated at a studentized observation");
        }
      }
      for (std::size_t k = 0; k <= n; ++k) {
        total += ad_piece(static_cast<double>(k) / nd, lo[k], lo[k + 1], up[k], up[k + 1]);
      }
      break;
    case WeightFunction::Kind::Table:
      for (std::size_t k = 0; k <= n; ++k) {
        total += table_piece(psi, static_cast<double>(k) / nd, lo[k], lo[k + 1]);
      }
      return total;
  }
  return psi.scale() * total;
}

double bhep_statistic(std::span<const double> z, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("BHEP beta must be positive");
  if (z.empty()) throw DomainError("BHEP statistic needs at least one observation");
  const double b2 = beta * beta;
  const auto n = static_cast<double>(z.size());

  // Every exponential is written as 1 + expm1(.) and the ones are summed in
  // closed form: for small beta the three terms are all close to n and
  // nearly cancel.
  double pair_sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::size_t k = j + 1; k < z.size(); ++k) {
      const double d = z[j] - z[k];
      pair_sum += std::expm1(-0.5 * b2 * d * d);
    }
  }
  double single_sum = 0.0;
  const double shrink = b2 / (2.0 * (1.0 + b2));
  for (double v : z) single_sum += std::expm1(-shrink * v * v);

  const double c1 = std::exp(-0.5 * std::log1p(b2));
  const double ones =
      -2.0 * std::expm1(-0.5 * std::log1p(b2)) + std::expm1(-0.5 * std::log1p(2.0 * b2));
  return n * ones + 2.0 * pair_sum / n - 2.0 * c1 * single_sum;
}

double evaluate_statistic(const TestKind& test, const Sample& sample,
                          const ShapiroWilkCoefficients* sw) {
  static const CdfFn phi = [](double x) { return std_normal_cdf(x); };
  switch (test.id()) {
    case TestKind::Id::KS:
      return ks_statistic(sample, phi);
    case TestKind::Id::CvM:
      return cvm_statistic(sample, phi);
    case TestKind::Id::AD: {
      // Both tails from the normal functions, so large |x| keeps precision.
      std::vector<double> u;
      std::vector<double> upper;
      u.reserve(sample.size());
      upper.reserve(sample.size());
      for (double x : sample.values()) {
        u.push_back(std_normal_cdf(x));
        upper.push_back(std_normal_survival(x));
      }
      return ad_from_tails(u, upper);
    }
    case TestKind::Id::Lilliefors:
      return lilliefors_statistic(sample, test.psi());
    case TestKind::Id::WeightedCvM:
      return weighted_cvm_statistic(sample, test.psi());
    case TestKind::Id::ShapiroWilk:
      if (sw != nullptr && sw->size() == sample.size()) return 1.0 - shapiro_wilk_w(sample, *sw);
      return shapiro_wilk_statistic(sample);
    case TestKind::Id::BHEP:
      return bhep_statistic(sample.studentized(), test.beta());
  }
  throw Unsupported("unknown test kind");
}

}  // namespace bahadur_lab
