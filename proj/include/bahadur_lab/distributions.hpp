#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bahadur_lab/random.hpp"
#include "bahadur_lab/sample.hpp"

namespace bahadur_lab {

enum class Family {
  Exponential,
  DoubleExponential,
  Cauchy,
  Beta,
  Logistic,
  Uniform,
  Normal,
};

struct MomentSummary {
  double mean;
  double sd;
};

/// One member of the closed set of alternative laws. Parameters are stored
/// as (first, second); their meaning depends on the family:
///   Exponential(rate), DoubleExponential(location, scale),
///   Cauchy(location, scale), Beta(alpha, beta), Logistic(location, scale),
///   Uniform(lo, hi), Normal(mean, sd).
/// Construction validates the parameters, so every instance is usable.
class AlternativeSpec {
 public:
  static AlternativeSpec exponential(double rate = 1.0);
  static AlternativeSpec double_exponential(double location = 0.0, double scale = 1.0);
  static AlternativeSpec cauchy(double location = 0.0, double scale = 1.0);
  static AlternativeSpec beta(double alpha, double beta);
  static AlternativeSpec logistic(double location = 0.0, double scale = 1.0);
  static AlternativeSpec uniform(double lo = 0.0, double hi = 1.0);
  static AlternativeSpec normal(double mean = 0.0, double sd = 1.0);

  /// Builds a family from its canonical name and positional parameters.
  /// Missing parameters take the defaults above (Beta has none).
  static AlternativeSpec from_name(const std::string& family, const std::vector<double>& params);

  [[nodiscard]] Family family() const noexcept { return family_; }
  [[nodiscard]] double first() const noexcept { return p1_; }
  [[nodiscard]] double second() const noexcept { return p2_; }

  /// Canonical family name, e.g. "double_exponential".
  [[nodiscard]] std::string family_name() const;
  /// Family name plus parameters, e.g. "beta(3,3)"; used as the table key.
  [[nodiscard]] std::string label() const;
  /// Stable 64-bit identity derived from family and parameter bits.
  [[nodiscard]] std::uint64_t stable_id() const noexcept;

  [[nodiscard]] double cdf(double x) const;
  /// Inverse CDF on (0,1).
  [[nodiscard]] double quantile(double u) const;
  /// Throws UndefinedMoments for Cauchy.
  [[nodiscard]] MomentSummary moments() const;
  [[nodiscard]] bool has_finite_variance() const noexcept { return family_ != Family::Cauchy; }
  /// Closed support endpoints (infinite where unbounded).
  [[nodiscard]] std::pair<double, double> support() const noexcept;

  friend bool operator==(const AlternativeSpec&, const AlternativeSpec&) = default;

 private:
  AlternativeSpec(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_;
  double p2_;
};

/// The seven comparison alternatives used by the default experiment, in order.
[[nodiscard]] std::vector<AlternativeSpec> table_alternatives();

[[nodiscard]] double alt_cdf(const AlternativeSpec& spec, double x);
[[nodiscard]] MomentSummary alt_moments(const AlternativeSpec& spec);

/// n i.i.d. draws, each the inverse CDF of the next uniform taken from
/// `stream`, in draw order. Throws DomainError for n = 0.
[[nodiscard]] std::vector<double> draw(const AlternativeSpec& spec, std::size_t n,
                                       RandomStream& stream);

/// draw() wrapped into a Sample.
[[nodiscard]] Sample sample(const AlternativeSpec& spec, std::size_t n, RandomStream& stream);

}  // namespace bahadur_lab
