#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bahadur_lab/distributions.hpp"
#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "bahadur_lab/random.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bl = bahadur_lab;
using boost::math::quadrature::gauss_kronrod;

namespace {

double phi_cdf(double x) { return bl::std_normal_cdf(x); }

double ecdf(const std::vector<double>& sorted, double t) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

// Integrates f over the real line, split at the given breakpoints.
template <class F>
double integrate_pieces(F f, std::vector<double> cuts, double lo, double hi) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] <= cuts[i - 1]) continue;
    total += gauss_kronrod<double, 61>::integrate(f, cuts[i - 1], cuts[i], 10, 1e-14);
  }
  return total;
}

std::vector<double> fixture(std::size_t n, int k) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(i);
    const double v = std::sin(1.7 * di + k) * 3.0 + std::cos(0.3 * di * di);
    x[i] = std::round(v * 1e6) / 1e6;
  }
  return x;
}

std::vector<double> random_sample(std::uint64_t seed, std::size_t n) {
  bl::RandomStream s(seed);
  return bl::draw(bl::AlternativeSpec::logistic(0.3, 1.7), n, s);
}

struct Studentized {
  std::vector<double> z;
  double mean;
  double sd;
};

Studentized studentize(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / (x.size() - 1));
  std::vector<double> z;
  for (double v : x) z.push_back((v - m) / sd);
  std::sort(z.begin(), z.end());
  return {z, m, sd};
}

}  // namespace

TEST(SimpleStatistics, KsMatchesDirectScan) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto x = random_sample(seed, 5 + 7 * seed);
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (double v : x) {
      d = std::max(d, std::fabs(ecdf(x, v) - phi_cdf(v)));
      d = std::max(d, std::fabs(ecdf(x, std::nextafter(v, -1e300)) - phi_cdf(v)));
    }
    EXPECT_NEAR(bl::ks_statistic(bl::Sample(x), phi_cdf), d, 1e-14);
  }
}

TEST(SimpleStatistics, CvmAndAdMatchQuadrature) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = random_sample(seed, 4 + 5 * seed);
    std::sort(x.begin(), x.end());
    const bl::Sample s(x);
    const double cvm = integrate_pieces(
        [&](double t) {
          const double d = ecdf(x, t) - phi_cdf(t);
          return d * d * bl::std_normal_pdf(t);
        },
        x, -40.0, 40.0);
    const double ad = integrate_pieces(
        [&](double t) {
          const double p = phi_cdf(t);
          const double q = bl::std_normal_survival(t);
          if (p <= 0.0 || q <= 0.0) return 0.0;
          const double d = ecdf(x, t) - p;
          return d * d * bl::std_normal_pdf(t) / (p * q);
        },
        x, -37.0, 8.0);
    EXPECT_NEAR(bl::cvm_statistic(s, phi_cdf), cvm, 1e-11);
    EXPECT_NEAR(bl::evaluate_statistic(bl::TestKind::ad(), s), ad, 1e-9 * (1.0 + ad));
    // The generic path forms 1 - F and loses the far upper tail.
    EXPECT_NEAR(bl::ad_statistic(s, phi_cdf), ad, 1e-4 * (1.0 + ad));
    EXPECT_NEAR(bl::anderson_darling_a2(s, phi_cdf), x.size() * bl::ad_statistic(s, phi_cdf),
                1e-12);
  }
}

TEST(SimpleStatistics, AdRejectsZeroTail) {
  const std::vector<double> u = {0.0, 0.5};
  const std::vector<double> up = {0.5, 1.0};
  EXPECT_THROW((void)bl::ad_from_tails(u, up), bl::DegenerateTail);
}

TEST(Lilliefors, UnitWeightMatchesDenseScan) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto x = random_sample(seed, 3 + 4 * seed);
    const auto st = studentize(x);
    double d = 0.0;
    for (double z : st.z) {
      d = std::max(d, std::fabs(ecdf(st.z, z) - phi_cdf(z)));
      d = std::max(d, std::fabs(ecdf(st.z, std::nextafter(z, -1e300)) - phi_cdf(z)));
    }
    EXPECT_NEAR(bl::lilliefors_statistic(bl::Sample(x)), d, 1e-12);
    EXPECT_NEAR(bl::lilliefors_statistic(bl::Sample(x), bl::WeightFunction::unit().scaled(2.5)),
                2.5 * d, 1e-12);
  }
}

TEST(Lilliefors, TableWeightMatchesDenseScan) {
  const auto psi = bl::WeightFunction::table({-1.0, 0.0, 1.5}, {0.5, 2.0, 1.0});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = random_sample(seed, 15);
    const auto st = studentize(x);
    double d = 0.0;
    for (double t = -9.0; t <= 9.0; t += 1e-4) {
      d = std::max(d, std::fabs(ecdf(st.z, t) - phi_cdf(t)) * psi(t));
    }
    for (double z : st.z) {
      d = std::max(d, std::fabs(ecdf(st.z, z) - phi_cdf(z)) * psi(z));
      d = std::max(d, std::fabs(ecdf(st.z, std::nextafter(z, -1e300)) - phi_cdf(z)) * psi(z));
    }
    const auto got = bl::lilliefors_statistic_bounded(bl::Sample(x), psi);
    EXPECT_GE(got.value + got.tolerance + 1e-12, d);
    EXPECT_LE(got.value, d + 1e-9);
  }
}

TEST(Lilliefors, RejectsDegenerateAndUnbounded) {
  EXPECT_THROW((void)bl::lilliefors_statistic(bl::Sample({2.0, 2.0, 2.0})), bl::DegenerateSample);
  EXPECT_THROW((void)bl::lilliefors_statistic(bl::Sample({1.0})), bl::DegenerateSample);
  EXPECT_THROW((void)bl::TestKind::lilliefors(bl::WeightFunction::anderson_darling()),
               bl::DomainError);
}

TEST(WeightedCvm, MatchesQuadratureForEachWeight) {
  const std::vector<bl::WeightFunction> weights = {
      bl::WeightFunction::unit(), bl::WeightFunction::anderson_darling(),
      bl::WeightFunction::table({0.0, 0.3, 0.8, 1.0}, {1.0, 3.0, 0.5, 2.0}).scaled(0.5)};
  for (const auto& psi : weights) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto x = random_sample(seed, 6 + 6 * seed);
      const auto st = studentize(x);
      const double expect = integrate_pieces(
          [&](double t) {
            const double p = phi_cdf(t);
            const double w = psi(p);
            if (!std::isfinite(w)) return 0.0;
            const double d = ecdf(st.z, t) - p;
            return d * d * w * bl::std_normal_pdf(t);
          },
          st.z, -37.0, 8.2);
      const double got = bl::weighted_cvm_statistic(bl::Sample(x), psi);
      EXPECT_NEAR(got, expect, 1e-9 * (1.0 + expect)) << psi.name() << " seed " << seed;
    }
  }
}

TEST(WeightedCvm, ReducesToClosedForms) {
  const auto x = random_sample(77, 25);
  const auto st = studentize(x);
  std::vector<double> u;
  std::vector<double> up;
  for (double z : st.z) {
    u.push_back(phi_cdf(z));
    up.push_back(bl::std_normal_survival(z));
  }
  EXPECT_NEAR(bl::weighted_cvm_statistic(bl::Sample(x), bl::WeightFunction::unit()),
              bl::cvm_from_uniforms(u), 1e-13);
  EXPECT_NEAR(bl::weighted_cvm_statistic(bl::Sample(x), bl::WeightFunction::anderson_darling()),
              bl::ad_from_tails(u, up), 1e-11);
}

TEST(Studentized, InvariantUnderAffineMaps) {
  const auto x = random_sample(5, 30);
  const std::vector<bl::TestKind> tests = {
      bl::TestKind::lilliefors(), bl::TestKind::weighted_cvm(),
      bl::TestKind::weighted_cvm(bl::WeightFunction::anderson_darling()),
      bl::TestKind::shapiro_wilk(), bl::TestKind::bhep(1.0), bl::TestKind::bhep(0.5)};
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{3.0, -2.0}, {-0.01, 100.0}}) {
    std::vector<double> y;
    for (double v : x) y.push_back(a * v + b);
    for (const auto& t : tests) {
      const double fx = bl::evaluate_statistic(t, bl::Sample(x));
      const double fy = bl::evaluate_statistic(t, bl::Sample(y));
      EXPECT_NEAR(fx, fy, 1e-10 * (1.0 + std::fabs(fx))) << t.label() << " a=" << a;
    }
  }
}

TEST(ShapiroWilk, MatchesReferenceImplementation) {
  // W from scipy.stats.shapiro (single-precision swilk) on deterministic
  // fixtures.
  const struct {
    std::size_t n;
    int k;
    double w;
  } cases[] = {{4, 0, 0.9959746614649676},  {5, 1, 0.8521113446402337},
               {12, 2, 0.9304325616358472}, {30, 3, 0.9381681472172055},
               {50, 4, 0.9406924746692528}, {200, 5, 0.950287939701468}};
  for (const auto& c : cases) {
    EXPECT_NEAR(bl::shapiro_wilk_w(bl::Sample(fixture(c.n, c.k))), c.w, 2e-6) << c.n;
  }
  EXPECT_NEAR(bl::shapiro_wilk_w(bl::Sample({0.1, 2.3, -1.4, 0.7, 3.9})), 0.9846303697136982,
              2e-6);
  EXPECT_NEAR(bl::shapiro_wilk_w(bl::Sample({-1.0, 0.0, 1.0})), 1.0, 1e-14);
  EXPECT_NEAR(bl::shapiro_wilk_statistic(bl::Sample({-1.0, 0.0, 1.0})), 0.0, 1e-14);
}

TEST(ShapiroWilk, CoefficientsAreAntisymmetricAndNormalized) {
  for (std::size_t n : {3u, 4u, 5u, 6u, 11u, 12u, 50u, 51u, 1000u}) {
    const bl::ShapiroWilkCoefficients c(n);
    const auto a = c.weights();
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(a[i], -a[n - 1 - i], 1e-14);
      if (i > 0) EXPECT_GE(a[i], a[i - 1]);
      ss += a[i] * a[i];
    }
    EXPECT_NEAR(ss, 1.0, 1e-12) << n;
  }
  EXPECT_THROW((void)bl::ShapiroWilkCoefficients(2), bl::Unsupported);
  EXPECT_THROW((void)bl::ShapiroWilkCoefficients(5001), bl::Unsupported);
  EXPECT_THROW((void)bl::shapiro_wilk_w(bl::Sample({1.0, 1.0, 1.0, 1.0})), bl::DegenerateSample);
}

TEST(Bhep, MatchesCharacteristicFunctionIntegral) {
  for (double beta : {0.5, 1.0, 2.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto st = studentize(random_sample(seed, 8 * seed));
      const double n = static_cast<double>(st.z.size());
      auto integrand = [&](double t) {
        double c = 0.0;
        double s = 0.0;
        for (double z : st.z) {
          c += std::cos(t * z);
          s += std::sin(t * z);
        }
        c = c / n - std::exp(-0.5 * t * t);
        s /= n;
        const double w = std::exp(-0.5 * t * t / (beta * beta)) / (beta * std::sqrt(2 * M_PI));
        return (c * c + s * s) * w;
      };
      const double expect = n * integrate_pieces(integrand, {0.0}, -14.0 * beta, 14.0 * beta);
      EXPECT_NEAR(bl::bhep_statistic(st.z, beta), expect, 1e-10 * (1.0 + expect)) << beta;
    }
  }
  EXPECT_THROW((void)bl::bhep_statistic(std::vector<double>{0.0, 1.0}, 0.0), bl::DomainError);
}

TEST(TestKind, ParsesNamesAndLabels) {
  EXPECT_EQ(bl::TestKind::parse("L").label(), "lilliefors");
  EXPECT_EQ(bl::TestKind::parse("CM").label(), "cvm");
  EXPECT_EQ(bl::TestKind::parse("AD").label(), "ad");
  EXPECT_EQ(bl::TestKind::parse("sw").label(), "shapiro_wilk");
  EXPECT_EQ(bl::TestKind::parse("bhep", bl::WeightFunction::unit(), 2.0).label(), "bhep[2]");
  EXPECT_EQ(bl::TestKind::parse("weighted_cvm", bl::WeightFunction::unit().scaled(3)).label(),
            "weighted_cvm[unit*3]");
  EXPECT_THROW((void)bl::TestKind::parse("jarque_bera"), bl::DomainError);
  EXPECT_NE(bl::TestKind::parse("cvm").stable_id(), bl::TestKind::parse("ad").stable_id());
}

TEST(WeightFunction, TableInterpolatesAndValidates) {
  const auto w = bl::WeightFunction::table({0.0, 1.0}, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(w(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(w(0.25), 1.5);
  EXPECT_DOUBLE_EQ(w(5.0), 3.0);
  EXPECT_DOUBLE_EQ(w.supremum(), 3.0);
  EXPECT_DOUBLE_EQ(w.max_slope(), 2.0);
  EXPECT_THROW((void)bl::WeightFunction::table({1.0, 0.0}, {1.0, 1.0}), bl::DomainError);
  EXPECT_THROW((void)bl::WeightFunction::table({0.0}, {-1.0}), bl::DomainError);
  EXPECT_THROW((void)bl::WeightFunction::unit().scaled(0.0), bl::DomainError);
}
