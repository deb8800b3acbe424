#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bahadur_lab/sample.hpp"

namespace bahadur_lab {

using CdfFn = std::function<double(double)>;

/// Nonnegative weight psi, always a positive multiple `scale` of one of three
/// shapes:
///   Unit          psi = 1
///   AndersonDarling psi(u) = 1/(u(1-u)) on (0,1), unbounded
///   Table         piecewise linear through (knot, value) pairs, constant
///                 beyond the first and last knot, bounded
/// Which variable psi is applied to depends on the statistic: the
/// studentized sup statistic evaluates psi(t) on the real line, the weighted
/// integral statistics evaluate psi(Phi(t)).
class WeightFunction {
 public:
  enum class Kind { Unit, AndersonDarling, Table };

  static WeightFunction unit();
  static WeightFunction anderson_darling();
  /// Knots strictly increasing, values finite and >= 0, at least one knot.
  static WeightFunction table(std::vector<double> knots, std::vector<double> values);

  /// Copy with every value multiplied by c > 0.
  [[nodiscard]] WeightFunction scaled(double c) const;

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] bool bounded() const noexcept { return kind_ != Kind::AndersonDarling; }
  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// psi(x); the Anderson-Darling shape is +inf outside (0,1).
  [[nodiscard]] double operator()(double x) const;

  /// sup psi (inf for the Anderson-Darling shape).
  [[nodiscard]] double supremum() const;
  /// Lipschitz constant of psi (0 for Unit; inf for Anderson-Darling).
  [[nodiscard]] double max_slope() const;

  /// "unit", "ad" or "table", with a "*c" suffix when scaled.
  [[nodiscard]] std::string name() const;

  friend bool operator==(const WeightFunction&, const WeightFunction&) = default;

 private:
  WeightFunction(Kind k, double scale) : kind_(k), scale_(scale) {}

  Kind kind_;
  double scale_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Which statistic to compute. Every statistic is oriented so that large
/// values reject normality (Shapiro-Wilk is reported as 1 - W).
///
/// KS, CvM and AD compare the raw sample against a fully specified null CDF
/// (standard normal inside the simulation harness); the remaining kinds are
/// studentized and location-scale invariant.
class TestKind {
 public:
  enum class Id { KS, CvM, AD, Lilliefors, WeightedCvM, ShapiroWilk, BHEP };

  static TestKind ks() { return TestKind(Id::KS); }
  static TestKind cvm() { return TestKind(Id::CvM); }
  static TestKind ad() { return TestKind(Id::AD); }
  /// psi must be bounded.
  static TestKind lilliefors(WeightFunction psi = WeightFunction::unit());
  static TestKind weighted_cvm(WeightFunction psi = WeightFunction::unit());
  static TestKind shapiro_wilk() { return TestKind(Id::ShapiroWilk); }
  /// beta > 0.
  static TestKind bhep(double beta = 1.0);

  /// Parses a test name. Accepted (case-insensitive):
  ///   ks, cvm_simple, ad_simple            statistics against Phi
  ///   lilliefors | L                       sup statistic with `psi`
  ///   cvm | CM                             weighted integral with psi = 1
  ///   ad | AD                              weighted integral with the AD weight
  ///   weighted_cvm                         weighted integral with `psi`
  ///   shapiro_wilk | SW, bhep | BHEP
  static TestKind parse(const std::string& name, const WeightFunction& psi = WeightFunction::unit(),
                        double beta = 1.0);

  [[nodiscard]] Id id() const noexcept { return id_; }
  [[nodiscard]] const WeightFunction& psi() const noexcept { return psi_; }
  [[nodiscard]] double beta() const noexcept { return beta_; }
  [[nodiscard]] bool studentized() const noexcept;
  /// Smallest sample size the statistic accepts.
  [[nodiscard]] std::size_t min_sample_size() const noexcept;

  /// Table key, e.g. "lilliefors", "ad", "weighted_cvm[table]", "bhep[1]".
  [[nodiscard]] std::string label() const;
  /// Hash of label(), used to derive random substreams.
  [[nodiscard]] std::uint64_t stable_id() const noexcept;

  friend bool operator==(const TestKind&, const TestKind&) = default;

 private:
  explicit TestKind(Id id) : id_(id) {}

  Id id_;
  WeightFunction psi_ = WeightFunction::unit();
  double beta_ = 1.0;
};

/// Value of a sup statistic together with a bound on how far below the true
/// supremum it may lie (zero where the supremum is located exactly).
struct BoundedValue {
  double value;
  double tolerance;
};

// Closed forms on the ordered probability-integral transforms u_(i).
/// max_i max(i/n - u_(i), u_(i) - (i-1)/n).
[[nodiscard]] double ks_from_uniforms(std::span<const double> u_sorted);
/// [1/(12n) + sum (u_(i) - (2i-1)/(2n))^2] / n, the integral normalization.
[[nodiscard]] double cvm_from_uniforms(std::span<const double> u_sorted);
/// -1 - n^-2 sum (2i-1)[ln u_(i) + ln upper_(n+1-i)], where upper = 1 - u is
/// passed separately so callers with an accurate survival function keep
/// precision. Throws DegenerateTail when any u or upper is 0.
[[nodiscard]] double ad_from_tails(std::span<const double> u_sorted,
                                   std::span<const double> upper_sorted_desc);
[[nodiscard]] double ad_from_uniforms(std::span<const double> u_sorted);

/// sup_t |F_n(t) - F0(t)|, exact for continuous F0.
[[nodiscard]] double ks_statistic(const Sample& sample, const CdfFn& null_cdf);
/// integral of (F_n - F0)^2 dF0.
[[nodiscard]] double cvm_statistic(const Sample& sample, const CdfFn& null_cdf);
/// integral of (F_n - F0)^2 / (F0 (1 - F0)) dF0, i.e. A^2 / n.
[[nodiscard]] double ad_statistic(const Sample& sample, const CdfFn& null_cdf);
/// Conventional Anderson-Darling A^2 (= n * ad_statistic).
[[nodiscard]] double anderson_darling_a2(const Sample& sample, const CdfFn& null_cdf);

struct LillieforsOptions {
  /// Grid points per inter-jump piece for non-unit weights.
  std::size_t grid_points = 512;
};

/// sup_t |F_n(mean + sd t) - Phi(t)| psi(t). For psi = c (Unit) the supremum
/// sits on a jump and the value is exact; other bounded weights use a grid
/// plus golden-section refinement, and `tolerance` bounds the shortfall.
/// Throws DegenerateSample for n < 2 or zero spread; Unsupported for an
/// unbounded psi.
[[nodiscard]] BoundedValue lilliefors_statistic_bounded(const Sample& sample,
                                                        const WeightFunction& psi,
                                                        const LillieforsOptions& options = {});
[[nodiscard]] double lilliefors_statistic(const Sample& sample,
                                          const WeightFunction& psi = WeightFunction::unit());

/// integral of [F_n(mean + sd t) - Phi(t)]^2 psi(Phi(t)) dPhi(t), summed in
/// closed form over the steps of F_n after substituting u = Phi(t).
[[nodiscard]] double weighted_cvm_statistic(const Sample& sample,
                                            const WeightFunction& psi = WeightFunction::unit());

/// Royston's approximation to the Shapiro-Wilk weights for 3 <= n <= 5000
/// (exact for n = 3). Weights are antisymmetric and increase with rank.
class ShapiroWilkCoefficients {
 public:
  explicit ShapiroWilkCoefficients(std::size_t n);
  [[nodiscard]] std::size_t size() const noexcept { return a_.size(); }
  [[nodiscard]] std::span<const double> weights() const noexcept { return a_; }

 private:
  std::vector<double> a_;
};

/// W in (0,1]. Throws Unsupported for n outside [3, 5000] and
/// DegenerateSample for a constant sample.
[[nodiscard]] double shapiro_wilk_w(const Sample& sample);
[[nodiscard]] double shapiro_wilk_w(const Sample& sample, const ShapiroWilkCoefficients& coeffs);
/// 1 - W, so that large values reject.
[[nodiscard]] double shapiro_wilk_statistic(const Sample& sample);

/// BHEP / Epps-Pulley statistic of already studentized data:
///   n^-1 sum_{j,k} exp(-b^2 (z_j - z_k)^2 / 2)
///   - 2 (1 + b^2)^(-1/2) sum_j exp(-b^2 z_j^2 / (2 (1 + b^2)))
///   + n (1 + 2 b^2)^(-1/2).
/// Throws DomainError for beta <= 0 or empty input.
[[nodiscard]] double bhep_statistic(std::span<const double> standardized, double beta = 1.0);

/// Scores `sample` with `test`; the simple-null kinds use Phi as F0.
/// `sw` may carry precomputed Shapiro-Wilk weights for this n.
[[nodiscard]] double evaluate_statistic(const TestKind& test, const Sample& sample,
                                        const ShapiroWilkCoefficients* sw = nullptr);

}  // namespace bahadur_lab
