#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bahadur_lab/distributions.hpp"
#include "bahadur_lab/random.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bahadur_lab {

/// The standard normal null. By location-scale invariance of the studentized
/// statistics it stands for the whole normal family.
struct NullSource {
  friend bool operator==(NullSource, NullSource) = default;
};

using Source = std::variant<NullSource, AlternativeSpec>;

[[nodiscard]] std::string source_label(const Source& source);
[[nodiscard]] std::uint64_t source_id(const Source& source);

/// Draws n observations from `source` (inverse CDF of uniforms from `stream`).
[[nodiscard]] std::vector<double> draw_source(const Source& source, std::size_t n,
                                              RandomStream& stream);

struct SimulationOptions {
  unsigned threads = 1;
  /// Fresh-substream retries allowed per replicate and test after a
  /// DegenerateSample / DegenerateTail before the whole column fails.
  std::size_t max_retries = 100;
};

/// Statistic draws for several tests scored on shared data.
///
/// Replicate r of every test is computed from the sample drawn on
/// stream.split(source_id).split(n).split(r).split(0); when a test finds
/// that sample degenerate it retries on .split(r).split(attempt).split(test
/// id) for attempt = 1, 2, ..., so retries never disturb the other tests.
struct Battery {
  /// One ascending column per test; empty when the test failed.
  std::vector<std::vector<double>> sorted;
  /// Retries consumed per test.
  std::vector<std::size_t> retries;
  /// Failure message per test (nullopt when the column is complete).
  std::vector<std::optional<std::string>> failures;
};

/// Throws DomainError for N = 0, n = 0 or a test needing larger n.
[[nodiscard]] Battery simulate_battery(std::span<const TestKind> tests, const Source& source,
                                       std::size_t n, std::size_t replications,
                                       const RandomStream& stream,
                                       const SimulationOptions& options = {});

/// Single-test view of simulate_battery: N replicates sorted ascending,
/// bit-identical for any thread count. Throws NumericalFailure when the
/// retry cap is exhausted.
[[nodiscard]] std::vector<double> simulate_statistics(const TestKind& test, const Source& source,
                                                      std::size_t n, std::size_t replications,
                                                      const RandomStream& stream,
                                                      const SimulationOptions& options = {});

/// Number of pairs (j, k) with null_j >= alt_k; `null_sorted` ascending.
[[nodiscard]] std::uint64_t count_null_at_least(std::span<const double> null_sorted,
                                                std::span<const double> alt);

/// (N_null N_alt)^-1 sum_{j,k} I(null_j >= alt_k), O(N log N) by binary search.
[[nodiscard]] double mean_pvalue(std::span<const double> null_sorted, std::span<const double> alt);

/// Same counting with strict inequality null_j > alt_k.
[[nodiscard]] double mean_pvalue_strict(std::span<const double> null_sorted,
                                        std::span<const double> alt);

struct PValueEstimate {
  double estimate;
  /// DeLong-style standard error from the placement values:
  ///   V_k = #{j : null_j >= alt_k} / N_null,  W_j = #{k : alt_k <= null_j} / N_alt,
  ///   se^2 = var(V) / N_alt + var(W) / N_null  (sample variances, divisor - 1).
  double std_error;
  std::uint64_t count;
};

[[nodiscard]] PValueEstimate estimate_mean_pvalue(std::span<const double> null_sorted,
                                                  std::span<const double> alt);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::vector<std::size_t> sample_sizes;
  std::vector<TestKind> tests;
  std::vector<AlternativeSpec> alternatives;
  double bhep_beta = 1.0;
  std::string output_path;

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct PValueCell {
  AlternativeSpec alternative;
  std::size_t n;
  TestKind test;
  double estimate;
  double std_error;
  /// Set when the cell could not be estimated; estimate and std_error are NaN.
  std::optional<std::string> failure;
};

struct ExperimentResult {
  std::vector<PValueCell> cells;
  /// Non-fatal observations, e.g. estimates that grow with n.
  std::vector<std::string> diagnostics;
};

/// One cell per (alternative, n, test). Null draws are simulated once per n
/// on RandomStream(seed).split(0) and shared by all alternatives; alternative
/// draws use RandomStream(seed).split(1).
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config,
                                              unsigned threads = 1);

}  // namespace bahadur_lab
