#include "bahadur_lab/distributions.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"

namespace bahadur_lab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be finite and strictly positive");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

// CDF of Beta(3,3): 10x^3 - 15x^4 + 6x^5.
double beta33_cdf(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }

// Safeguarded Newton on [0, 1/2] for u <= 1/2; the upper half by symmetry.
double beta33_quantile(double u) {
  if (u > 0.5) return 1.0 - beta33_quantile(1.0 - u);
  double lo = 0.0;
  double hi = 0.5;
  double x = std::cbrt(u / 10.0);
  if (!(x > lo && x < hi)) x = 0.25;
  for (int it = 0; it < 100; ++it) {
    const double f = beta33_cdf(x) - u;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-16 * x) return next;
    x = next;
  }
  return x;
}

}  // namespace

AlternativeSpec AlternativeSpec::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return {Family::Exponential, rate, 0.0};
}

AlternativeSpec AlternativeSpec::double_exponential(double location, double scale) {
  require_finite(location, "double exponential location");
  require_positive(scale, "double exponential scale");
  return {Family::DoubleExponential, location, scale};
}

AlternativeSpec AlternativeSpec::cauchy(double location, double scale) {
  require_finite(location, "Cauchy location");
  require_positive(scale, "Cauchy scale");
  return {Family::Cauchy, location, scale};
}

AlternativeSpec AlternativeSpec::beta(double alpha, double beta) {
  require_positive(alpha, "Beta alpha");
  require_positive(beta, "Beta beta");
  return {Family::Beta, alpha, beta};
}

AlternativeSpec AlternativeSpec::logistic(double location, double scale) {
  require_finite(location, "logistic location");
  require_positive(scale, "logistic scale");
  return {Family::Logistic, location, scale};
}

AlternativeSpec AlternativeSpec::uniform(double lo, double hi) {
  require_finite(lo, "uniform lo");
  require_finite(hi, "uniform hi");
  if (!(lo < hi)) throw DomainError("uniform requires lo < hi");
  return {Family::Uniform, lo, hi};
}

AlternativeSpec AlternativeSpec::normal(double mean, double sd) {
  require_finite(mean, "normal mean");
  require_positive(sd, "normal sd");
  return {Family::Normal, mean, sd};
}

AlternativeSpec AlternativeSpec::from_name(const std::string& family,
                                           const std::vector<double>& params) {
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  const std::size_t max_params = family == "exponential" ? 1 : 2;
  if (params.size() > max_params) {
    throw DomainError("too many parameters for family '" + family + "'");
  }
  if (family == "exponential") return exponential(param(0, 1.0));
  if (family == "double_exponential" || family == "laplace") {
    return double_exponential(param(0, 0.0), param(1, 1.0));
  }
  if (family == "cauchy") return cauchy(param(0, 0.0), param(1, 1.0));
  if (family == "beta") {
    if (params.size() != 2) throw DomainError("beta needs two shape parameters");
    return beta(params[0], params[1]);
  }
  if (family == "logistic") return logistic(param(0, 0.0), param(1, 1.0));
  if (family == "uniform") return uniform(param(0, 0.0), param(1, 1.0));
  if (family == "normal") return normal(param(0, 0.0), param(1, 1.0));
  throw DomainError("unknown distribution family '" + family + "'");
}

std::string AlternativeSpec::family_name() const {
  switch (family_) {
    case Family::Exponential: return "exponential";
    case Family::DoubleExponential: return "double_exponential";
    case Family::Cauchy: return "cauchy";
    case Family::Beta: return "beta";
    case Family::Logistic: return "logistic";
    case Family::Uniform: return "uniform";
    case Family::Normal: return "normal";
  }
  return "unknown";
}

std::string AlternativeSpec::label() const {
  std::string out = family_name() + "(" + shortest(p1_);
  if (family_ != Family::Exponential) out += "," + shortest(p2_);
  return out + ")";
}

std::uint64_t AlternativeSpec::stable_id() const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(family_) + 1);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(p1_));
  return mix64(h ^ std::bit_cast<std::uint64_t>(p2_));
}

double AlternativeSpec::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("cdf: NaN argument");
  switch (family_) {
    case Family::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-p1_ * x);
    case Family::DoubleExponential: {
      const double y = (x - p1_) / p2_;
      return y < 0.0 ? 0.5 * std::exp(y) : 1.0 - 0.5 * std::exp(-y);
    }
    case Family::Cauchy:
      return 0.5 + std::atan((x - p1_) / p2_) * std::numbers::inv_pi;
    case Family::Beta:
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return boost::math::ibeta(p1_, p2_, x);
    case Family::Logistic:
      return 1.0 / (1.0 + std::exp(-(x - p1_) / p2_));
    case Family::Uniform:
      if (x <= p1_) return 0.0;
      if (x >= p2_) return 1.0;
      return (x - p1_) / (p2_ - p1_);
    case Family::Normal:
      return std_normal_cdf((x - p1_) / p2_);
  }
  return 0.0;
}

double AlternativeSpec::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0,1)");
  switch (family_) {
    case Family::Exponential:
      return -std::log1p(-u) / p1_;
    case Family::DoubleExponential:
      return u < 0.5 ? p1_ + p2_ * std::log(2.0 * u) : p1_ - p2_ * std::log(2.0 * (1.0 - u));
    case Family::Cauchy:
      return p1_ + p2_ * std::tan(std::numbers::pi * (u - 0.5));
    case Family::Beta:
      if (p2_ == 1.0) return std::pow(u, 1.0 / p1_);
      if (p1_ == 1.0) return -std::expm1(std::log1p(-u) / p2_);
      if (p1_ == 3.0 && p2_ == 3.0) return beta33_quantile(u);
      return boost::math::ibeta_inv(p1_, p2_, u);
    case Family::Logistic:
      return p1_ + p2_ * (std::log(u) - std::log1p(-u));
    case Family::Uniform:
      return p1_ + (p2_ - p1_) * u;
    case Family::Normal:
      return p1_ + p2_ * std_normal_quantile(u);
  }
  return 0.0;
}

MomentSummary AlternativeSpec::moments() const {
  switch (family_) {
    case Family::Exponential:
      return {1.0 / p1_, 1.0 / p1_};
    case Family::DoubleExponential:
      return {p1_, std::numbers::sqrt2 * p2_};
    case Family::Cauchy:
      throw UndefinedMoments("Cauchy distribution has no mean or variance");
    case Family::Beta: {
      const double s = p1_ + p2_;
      return {p1_ / s, std::sqrt(p1_ * p2_ / (s * s * (s + 1.0)))};
    }
    case Family::Logistic:
      return {p1_, p2_ * std::numbers::pi / std::sqrt(3.0)};
    case Family::Uniform:
      return {0.5 * (p1_ + p2_), (p2_ - p1_) / std::sqrt(12.0)};
    case Family::Normal:
      return {p1_, p2_};
  }
  return {0.0, 1.0};
}

std::pair<double, double> AlternativeSpec::support() const noexcept {
  switch (family_) {
    case Family::Exponential: return {0.0, kInf};
    case Family::Beta: return {0.0, 1.0};
    case Family::Uniform: return {p1_, p2_};
    default: return {-kInf, kInf};
  }
}

std::vector<AlternativeSpec> table_alternatives() {
  return {AlternativeSpec::exponential(1.0),     AlternativeSpec::double_exponential(0.0, 1.0),
          AlternativeSpec::cauchy(0.0, 1.0),     AlternativeSpec::beta(2.0, 1.0),
          AlternativeSpec::beta(3.0, 3.0),       AlternativeSpec::logistic(0.0, 1.0),
          AlternativeSpec::uniform(0.0, 1.0)};
}

double alt_cdf(const AlternativeSpec& spec, double x) { return spec.cdf(x); }

MomentSummary alt_moments(const AlternativeSpec& spec) { return spec.moments(); }

std::vector<double> draw(const AlternativeSpec& spec, std::size_t n, RandomStream& stream) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = spec.quantile(stream.next_uniform());
  return out;
}

Sample sample(const AlternativeSpec& spec, std::size_t n, RandomStream& stream) {
  return Sample(draw(spec, n, stream));
}

}  // namespace bahadur_lab
