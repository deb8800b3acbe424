#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bahadur_lab {

/// Probability measure on finitely many points: support strictly increasing,
/// weights nonnegative and summing to 1 within 1e-12.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> support, std::vector<double> weights);

  /// Equal weights on `support`.
  static DiscreteMeasure uniform(std::vector<double> support);

  [[nodiscard]] std::span<const double> support() const noexcept { return support_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }

  /// Mass of atoms <= s.
  [[nodiscard]] double cdf(double s) const;
  /// sum_i w_i f_i for a coefficient vector f over the atoms.
  [[nodiscard]] double expectation(std::span<const double> f) const;
  /// Relative entropy sum q_i ln(q_i / p_i) of this measure against
  /// `reference` (same support); +inf when not absolutely continuous.
  [[nodiscard]] double relative_entropy(const DiscreteMeasure& reference) const;

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

enum class Relation { Equal, AtLeast };

/// sum_i q_i coefficients_i (relation) bound.
struct LinearConstraint {
  std::vector<double> coefficients;
  Relation relation;
  double bound;
  std::string label;
};

/// Linear constraints on the weights of a measure over a fixed support.
class ConstraintSet {
 public:
  ConstraintSet& add(LinearConstraint constraint);
  ConstraintSet& equal(std::vector<double> coefficients, double bound, std::string label = {});
  ConstraintSet& at_least(std::vector<double> coefficients, double bound, std::string label = {});

  /// Q(S <= t) relation bound, with indicator coefficients on the atoms.
  ConstraintSet& tail_mass(std::span<const double> support, double t, Relation relation,
                           double bound);
  /// Q(S <= t) <= bound, stored as -Q(S <= t) >= -bound.
  ConstraintSet& tail_mass_at_most(std::span<const double> support, double t, double bound);
  /// E_Q[S] = a.
  ConstraintSet& mean(std::span<const double> support, double a);
  /// E_Q[S^2] = b.
  ConstraintSet& second_moment(std::span<const double> support, double b);

  [[nodiscard]] std::span<const LinearConstraint> constraints() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }

  /// sum_i q_i coefficients_i - bound for constraint j.
  [[nodiscard]] double slack(std::size_t j, std::span<const double> weights) const;

 private:
  std::vector<LinearConstraint> items_;
};

enum class TiltStatus { Converged, Infeasible, MaxIterations };

struct TiltOptions {
  int max_iterations = 200;
  /// The dual is declared divergent (problem infeasible) past this sup-norm.
  double divergence_norm = 50.0;
  /// Stop once every KKT residual is at most this.
  double tolerance = 1e-11;
};

struct TiltResult {
  TiltStatus status;
  /// Minimal relative entropy; +inf unless converged.
  double kl;
  /// Optimal weights over the reference support (empty unless converged).
  std::vector<double> weights;
  /// Multipliers of the exponential-family solution q ~ p exp(sum l_j g_j).
  std::vector<double> multipliers;
  int iterations;
  /// Largest of |slack| for equalities and active inequalities and of the
  /// violation of inactive inequalities.
  double kkt_residual;
};

/// min_q sum q_i ln(q_i / p_i) subject to `constraints`, through the dual
///   max_l  sum_j l_j b_j - ln sum_i p_i exp(sum_j l_j g_ji),  l_j >= 0 for
///   inequalities,
/// solved by damped projected Newton (step halving until the dual improves).
/// Infeasible problems are reported through `status`, not thrown.
[[nodiscard]] TiltResult min_kl_tilt(const DiscreteMeasure& reference,
                                     const ConstraintSet& constraints,
                                     const TiltOptions& options = {});

/// Convenience view of a converged result as a measure on the reference
/// support. Throws Infeasible / NumericalFailure when not converged.
[[nodiscard]] DiscreteMeasure minimizer(const DiscreteMeasure& reference, const TiltResult& result);

struct PartitionParams {
  /// Number of cells (>= 3): two tail cells of mass `tail_probability` and
  /// atoms - 2 interior cells of equal mass.
  std::size_t atoms = 2001;
  double tail_probability = 1e-6;

  /// Parameters whose interior cells split every current cell in two.
  [[nodiscard]] PartitionParams refined() const { return {2 * atoms - 2, tail_probability}; }
};

/// Discretization of the standard normal law as a partition of the real line
/// into cells of prescribed probability. A weight vector q over the cells is
/// read as the continuous law with density q_k / P_k times phi on cell k, so
///   relative entropy against Phi  = sum q_k ln(q_k / P_k),
///   Q(S <= s)                     = sum_k q_k P(Z <= s | cell k),
///   E_Q[S], E_Q[S^2]              = sum_k q_k E[Z | cell k], sum_k q_k E[Z^2 | cell k].
/// Every constraint used by the variational bounds is linear in q with exact
/// coefficients, and a finer nested partition contains every coarser law.
class GaussianPartition {
 public:
  explicit GaussianPartition(const PartitionParams& params = {});

  /// Support = conditional cell means, weights = cell probabilities.
  [[nodiscard]] const DiscreteMeasure& measure() const noexcept { return measure_; }
  [[nodiscard]] std::size_t size() const noexcept { return masses_.size(); }
  /// Interior boundaries c_1 < ... < c_{m-1}.
  [[nodiscard]] std::span<const double> boundaries() const noexcept { return boundaries_; }
  /// Reference probability of cells 0..k-1 (size m + 1, from 0 to 1).
  [[nodiscard]] std::span<const double> cumulative_lower() const noexcept { return lower_; }
  /// Reference probability of cells k..m-1 (size m + 1, from 1 to 0).
  [[nodiscard]] std::span<const double> cumulative_upper() const noexcept { return upper_; }

  /// P(Z <= s | cell k) for every k.
  [[nodiscard]] std::vector<double> tail_mass_coefficients(double s) const;
  [[nodiscard]] std::span<const double> mean_coefficients() const noexcept { return means_; }
  [[nodiscard]] std::span<const double> second_moment_coefficients() const noexcept {
    return second_;
  }

  /// Q(S <= s) of the lifted law with cell weights q.
  [[nodiscard]] double lifted_cdf(std::span<const double> q, double s) const;

 private:
  std::vector<double> boundaries_;
  std::vector<double> masses_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> means_;
  std::vector<double> second_;
  DiscreteMeasure measure_;
};

}  // namespace bahadur_lab
