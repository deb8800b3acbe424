#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bahadur_lab/distributions.hpp"
#include "bahadur_lab/kl_tilt.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bahadur_lab {

/// Large-deviation rate of the Kolmogorov-Smirnov statistic,
///   G(a) = inf_{0 < t <= 1-a} (a+t) ln((a+t)/t) + (1-a-t) ln((1-a-t)/(1-t)),
/// with 0 ln 0 = 0. G(0) = 0 and G(1) = +inf. Throws DomainError outside
/// [0,1].
[[nodiscard]] double ks_rate_G(double a);

/// Exponent of the p-value decay (n^-1 ln p -> -exponent) next to the Bahadur
/// slope, which is twice the exponent.
struct SlopeEstimate {
  enum class Kind { Exact, UpperBound };

  double discrepancy;
  double exponent;
  double slope;
  Kind kind;

  static SlopeEstimate make(double discrepancy, double exponent, Kind kind) {
    return {discrepancy, exponent, 2.0 * exponent, kind};
  }
};

/// Location of a supremum together with its value.
struct SupPoint {
  double t;
  double value;
};

/// sup_t |F(t) - F0(t)| by a scan over the quantiles of both laws followed by
/// golden-section refinement of the best local maxima. Accurate to about
/// 1e-8 for continuous F, F0.
[[nodiscard]] SupPoint sup_discrepancy_point(const CdfFn& f, const CdfFn& f0);
[[nodiscard]] double sup_discrepancy_simple(const CdfFn& f, const CdfFn& f0);

/// Exact slope of the simple KS test: exponent G(sup |F - F0|).
[[nodiscard]] SlopeEstimate ks_slope(const CdfFn& f, const CdfFn& f0);
/// ks_slope(spec, Phi).
[[nodiscard]] SlopeEstimate ks_slope(const AlternativeSpec& spec);

/// sup_t |F(mu + sigma t) - Phi(t)| psi(t) for the standardized alternative.
/// Throws UndefinedMoments without a finite variance and DomainError for an
/// unbounded psi.
[[nodiscard]] SupPoint lilliefors_discrepancy_point(const AlternativeSpec& spec,
                                                    const WeightFunction& psi);
[[nodiscard]] double lilliefors_discrepancy(const AlternativeSpec& spec,
                                            const WeightFunction& psi);

/// int [F(mu + sigma t) - Phi(t)]^2 psi(Phi(t)) dPhi(t), to absolute
/// tolerance 1e-10. Throws NumericalFailure if the quadrature does not settle.
[[nodiscard]] double ad_discrepancy(const AlternativeSpec& spec, const WeightFunction& psi);

/// Grids of the variational bounds. Every grid is nested under refined(), so a
/// refined search sees every candidate of the coarse one.
struct GridParams {
  PartitionParams reference{};
  /// Uniform t grid on [t_min, t_max].
  std::size_t t_points = 241;
  double t_min = -6.0;
  double t_max = 6.0;
  /// Also try every t that maps to a partition boundary (exact tail cells).
  bool partition_points = true;
  /// Mean grid a = i / a_divisions within [a_min, a_max].
  int a_divisions = 10;
  double a_min = -1.5;
  double a_max = 1.5;
  /// Second-moment grid b = j / b_divisions within [b_min, b_max].
  int b_divisions = 8;
  double b_min = 0.25;
  double b_max = 4.0;
  /// Drop the mean and second-moment constraints (then only the pinned or
  /// default (0,1) moments place the tail point).
  bool moment_constraints = true;
  /// Restrict the search to a single (a, b).
  std::optional<std::pair<double, double>> pinned_moments;
  /// Deviation levels scanned per cell by the integral bound.
  std::size_t deviation_levels = 24;
  unsigned threads = 1;
  TiltOptions tilt{};
  /// refined() steps behind this grid. The integral bound also searches each
  /// coarser grid, since its single-bump candidates are not nested.
  std::size_t refinements = 0;

  [[nodiscard]] GridParams refined() const;
  /// Inverse of refined(); DomainError when refinements == 0.
  [[nodiscard]] GridParams coarser() const;
  [[nodiscard]] std::vector<double> t_grid() const;
  [[nodiscard]] std::vector<std::pair<double, double>> moment_grid() const;
};

/// Candidate laws for the variational bounds: cells (t, sign, a, b) on a
/// GaussianPartition, where the law has mean a, second moment b and its CDF
/// x satisfies x(a + sigma t) >= Phi(t) + d (sign +1) or <= Phi(t) - d
/// (sign -1), sigma = sqrt(b - a^2).
struct CellSpec {
  double t;
  int sign;
  double a;
  double b;
};

struct BoundResult {
  /// Smallest relative entropy found (+inf when nothing is feasible).
  double value;
  std::optional<CellSpec> cell;
  /// Deviation d of the best cell.
  double deviation;
  std::vector<double> weights;
  std::size_t cells_solved;
  std::size_t blocks_pruned;
};

class VariationalSolver {
 public:
  explicit VariationalSolver(GridParams grid = {});

  [[nodiscard]] const GaussianPartition& partition() const noexcept { return partition_; }
  [[nodiscard]] const GridParams& grid() const noexcept { return grid_; }

  /// Minimal relative entropy of a lifted law in `cell` with deviation d.
  [[nodiscard]] TiltResult solve_cell(const CellSpec& cell, double deviation,
                                      std::span<const double> start = {}) const;
  /// Minimal relative entropy subject to the mean/second-moment constraints
  /// only (0 when they are dropped).
  [[nodiscard]] double moment_entropy(double a, double b) const;

  /// int [x(a + sigma t) - Phi(t)]^2 psi(Phi(t)) dPhi(t) for the lifted law
  /// with cell weights q.
  [[nodiscard]] double deviation_integral(std::span<const double> q, const WeightFunction& psi,
                                          double a, double b) const;

  /// Upper bound on inf J(Q) over laws with sup_t |x(a + sigma t) - Phi(t)| psi(t) >= u.
  [[nodiscard]] BoundResult lilliefors_bound(double u, const WeightFunction& psi) const;
  /// Upper bound on inf J(Q) over laws whose deviation integral is >= u,
  /// searching single-bump deviations per cell.
  [[nodiscard]] BoundResult integral_bound(double u, const WeightFunction& psi) const;
  /// integral_bound restricted to the given cells.
  [[nodiscard]] BoundResult integral_bound(double u, const WeightFunction& psi,
                                           std::span<const CellSpec> cells) const;

 private:
  struct Block {
    double a;
    double b;
    double entropy;
    std::size_t index;
    std::vector<double> start;
  };

  double sigma(double a, double b) const;
  TiltResult moment_solution(double a, double b) const;
  Block make_block(double a, double b, std::size_t index) const;
  GridParams grid_;
  double cell_search(double u, const WeightFunction& psi, const CellSpec& cell, double cap,
                     std::span<const double> start, double* deviation) const;
  GaussianPartition partition_;
  std::vector<double> log_weights_;
};

/// Upper bounds on the variational exponents of the studentized sup and
/// integral statistics. Throw Infeasible when no grid cell is feasible.
[[nodiscard]] double gli_upper_bound(double u, const WeightFunction& psi,
                                     const GridParams& grid = {});
[[nodiscard]] double gad_upper_bound(double u, const WeightFunction& psi,
                                     const GridParams& grid = {});

/// Slope bounds for the weighted Lilliefors and weighted Cramer-von Mises
/// tests against `spec` (kind UpperBound).
[[nodiscard]] SlopeEstimate lilliefors_slope(const AlternativeSpec& spec, const WeightFunction& psi,
                                             const GridParams& grid = {});
[[nodiscard]] SlopeEstimate weighted_cvm_slope(const AlternativeSpec& spec,
                                               const WeightFunction& psi,
                                               const GridParams& grid = {});

/// Slope of `test` against `spec`: exact for ks, upper bounds for the
/// weighted sup and integral tests. Unsupported for the remaining tests.
[[nodiscard]] SlopeEstimate test_slope(const AlternativeSpec& spec, const TestKind& test,
                                       const GridParams& grid = {});

/// Gauge norm of the indicator of a set of probability p in the Orlicz space
/// of alpha(x) = exp(1/x) - 1/x: the lambda with alpha(lambda) = 1 + 1/p.
/// Throws DomainError unless 0 < p <= 1.
[[nodiscard]] double orlicz_gauge_indicator(double p);

}  // namespace bahadur_lab
