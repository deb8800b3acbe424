#include "bahadur_lab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "detail/parallel.hpp"

namespace bahadur_lab {
namespace {

constexpr std::uint64_t kNullSourceId = 0x4E554C4C534F5552ULL;
constexpr std::uint64_t kReferenceRole = 0;
constexpr std::uint64_t kAlternativeRole = 1;

struct Overloaded {
  std::string operator()(NullSource) const { return "null"; }
  std::string operator()(const AlternativeSpec& a) const { return a.label(); }
};

// Scores one replicate for every test; degenerate draws are retried per test.
class ReplicateScorer {
 public:
  ReplicateScorer(std::span<const TestKind> tests, const Source& source, std::size_t n,
                  std::size_t max_retries)
      : tests_(tests), source_(source), n_(n), max_retries_(max_retries) {
    for (const auto& t : tests_) {
      if (t.id() == TestKind::Id::ShapiroWilk) {
        sw_ = std::make_unique<ShapiroWilkCoefficients>(n);
        break;
      }
    }
  }

  // Writes one value per test into `out`. `retries[t]` receives the retries
  // test t consumed and stays at max_retries + 1 when it never succeeded.
  void score(const RandomStream& replicate, std::span<double> out,
             std::span<std::uint16_t> retries) const {
    RandomStream data_stream = replicate.split(0);
    const Sample shared(draw_source(source_, n_, data_stream));
    for (std::size_t t = 0; t < tests_.size(); ++t) {
      retries[t] = 0;
      try {
        out[t] = evaluate_statistic(tests_[t], shared, sw_.get());
        continue;
      } catch (const DegenerateSample&) {
      } catch (const DegenerateTail&) {
      }
      bool done = false;
      for (std::size_t attempt = 1; attempt <= max_retries_ && !done; ++attempt) {
        ++retries[t];
        RandomStream retry = replicate.split(attempt).split(tests_[t].stable_id());
        try {
          out[t] = evaluate_statistic(tests_[t], Sample(draw_source(source_, n_, retry)),
                                      sw_.get());
          done = true;
        } catch (const DegenerateSample&) {
        } catch (const DegenerateTail&) {
        }
      }
      if (!done) ++retries[t];
    }
  }

 private:
  std::span<const TestKind> tests_;
  const Source& source_;
  std::size_t n_;
  std::size_t max_retries_;
  std::unique_ptr<ShapiroWilkCoefficients> sw_;
};

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

std::string source_label(const Source& source) { return std::visit(Overloaded{}, source); }

std::uint64_t source_id(const Source& source) {
  if (const auto* alt = std::get_if<AlternativeSpec>(&source)) return alt->stable_id();
  return kNullSourceId;
}

std::vector<double> draw_source(const Source& source, std::size_t n, RandomStream& stream) {
  if (const auto* alt = std::get_if<AlternativeSpec>(&source)) return draw(*alt, n, stream);
  if (n == 0) throw DomainError("sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = std_normal_quantile(stream.next_uniform());
  return out;
}

Battery simulate_battery(std::span<const TestKind> tests, const Source& source, std::size_t n,
                         std::size_t replications, const RandomStream& stream,
                         const SimulationOptions& options) {
  if (replications == 0) throw DomainError("number of replications must be at least 1");
  if (n == 0) throw DomainError("sample size must be at least 1");
  for (const auto& t : tests) {
    if (n < t.min_sample_size()) {
      throw DomainError("test " + t.label() + " needs n >= " + std::to_string(t.min_sample_size()));
    }
  }
  if (options.max_retries >= 0xFFFF) throw DomainError("max_retries must be below 65535");
  const std::size_t k = tests.size();
  const ReplicateScorer scorer(tests, source, n, options.max_retries);
  const RandomStream base = stream.split(source_id(source)).split(n);

  std::vector<double> values(replications * k);
  std::vector<std::uint16_t> retries(replications * k, 0);
  detail::parallel_for(replications, options.threads, [&](std::size_t r) {
    scorer.score(base.split(r), std::span<double>(values).subspan(r * k, k),
                 std::span<std::uint16_t>(retries).subspan(r * k, k));
  });

  Battery out;
  out.sorted.resize(k);
  out.retries.assign(k, 0);
  out.failures.resize(k);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t failures = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      const std::size_t used = retries[r * k + t];
      if (used > options.max_retries) {
        ++failures;
      } else {
        out.retries[t] += used;
      }
    }
    if (failures > 0) {
      std::ostringstream msg;
      msg << tests[t].label() << " on " << source_label(source) << " n=" << n << ": " << failures
          << " replicate(s) stayed degenerate after " << options.max_retries << " retries";
      out.failures[t] = msg.str();
      continue;
    }
    auto& column = out.sorted[t];
    column.resize(replications);
    for (std::size_t r = 0; r < replications; ++r) column[r] = values[r * k + t];
    std::sort(column.begin(), column.end());
  }
  return out;
}

std::vector<double> simulate_statistics(const TestKind& test, const Source& source, std::size_t n,
                                        std::size_t replications, const RandomStream& stream,
                                        const SimulationOptions& options) {
  auto battery = simulate_battery(std::span<const TestKind>(&test, 1), source, n, replications,
                                  stream, options);
  if (battery.failures[0]) throw NumericalFailure(*battery.failures[0]);
  return std::move(battery.sorted[0]);
}

std::uint64_t count_null_at_least(std::span<const double> null_sorted,
                                  std::span<const double> alt) {
  std::uint64_t count = 0;
  for (double a : alt) {
    const auto first = std::lower_bound(null_sorted.begin(), null_sorted.end(), a);
    count += static_cast<std::uint64_t>(null_sorted.end() - first);
  }
  return count;
}

double mean_pvalue(std::span<const double> null_sorted, std::span<const double> alt) {
  if (null_sorted.empty() || alt.empty()) throw DomainError("mean_pvalue: empty input");
  const auto pairs = static_cast<double>(null_sorted.size()) * static_cast<double>(alt.size());
  return static_cast<double>(count_null_at_least(null_sorted, alt)) / pairs;
}

double mean_pvalue_strict(std::span<const double> null_sorted, std::span<const double> alt) {
  if (null_sorted.empty() || alt.empty()) throw DomainError("mean_pvalue: empty input");
  std::uint64_t count = 0;
  for (double a : alt) {
    const auto first = std::upper_bound(null_sorted.begin(), null_sorted.end(), a);
    count += static_cast<std::uint64_t>(null_sorted.end() - first);
  }
  const auto pairs = static_cast<double>(null_sorted.size()) * static_cast<double>(alt.size());
  return static_cast<double>(count) / pairs;
}

PValueEstimate estimate_mean_pvalue(std::span<const double> null_sorted,
                                    std::span<const double> alt) {
  if (null_sorted.empty() || alt.empty()) throw DomainError("mean_pvalue: empty input");
  const auto n_null = static_cast<double>(null_sorted.size());
  const auto n_alt = static_cast<double>(alt.size());

  std::vector<double> alt_sorted(alt.begin(), alt.end());
  std::sort(alt_sorted.begin(), alt_sorted.end());

  std::uint64_t count = 0;
  std::vector<double> v(alt_sorted.size());
  for (std::size_t k = 0; k < alt_sorted.size(); ++k) {
    const auto first = std::lower_bound(null_sorted.begin(), null_sorted.end(), alt_sorted[k]);
    const auto c = static_cast<std::uint64_t>(null_sorted.end() - first);
    count += c;
    v[k] = static_cast<double>(c) / n_null;
  }
  std::vector<double> w(null_sorted.size());
  for (std::size_t j = 0; j < null_sorted.size(); ++j) {
    const auto last = std::upper_bound(alt_sorted.begin(), alt_sorted.end(), null_sorted[j]);
    w[j] = static_cast<double>(last - alt_sorted.begin()) / n_alt;
  }
  const double se = std::sqrt(sample_variance(v) / n_alt + sample_variance(w) / n_null);
  return {static_cast<double>(count) / (n_null * n_alt), se, count};
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (sample_sizes.empty()) throw DomainError("sample_sizes must not be empty");
  for (auto n : sample_sizes) {
    if (n < 3) throw DomainError("every sample size must be at least 3");
    for (const auto& t : tests) {
      if (t.id() == TestKind::Id::ShapiroWilk && n > 5000) {
        throw DomainError("shapiro_wilk supports n <= 5000");
      }
    }
  }
  if (tests.empty()) throw DomainError("tests must not be empty");
  if (alternatives.empty()) throw DomainError("alternatives must not be empty");
  if (!(bhep_beta > 0.0)) throw DomainError("bhep_beta must be positive");
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const RandomStream root(config.seed);
  const SimulationOptions options{threads, 100};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  ExperimentResult result;
  for (std::size_t n : config.sample_sizes) {
    const Battery null = simulate_battery(config.tests, NullSource{}, n, config.replications,
                                          root.split(kReferenceRole), options);
    for (const auto& alt : config.alternatives) {
      const Battery draws = simulate_battery(config.tests, alt, n, config.replications,
                                             root.split(kAlternativeRole), options);
      for (std::size_t t = 0; t < config.tests.size(); ++t) {
        PValueCell cell{alt, n, config.tests[t], nan, nan, std::nullopt};
        if (null.failures[t]) {
          cell.failure = "null reference: " + *null.failures[t];
        } else if (draws.failures[t]) {
          cell.failure = *draws.failures[t];
        } else {
          const auto est = estimate_mean_pvalue(null.sorted[t], draws.sorted[t]);
          cell.estimate = est.estimate;
          cell.std_error = est.std_error;
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }

  // Soft trend check: consistent tests should not get worse as n grows.
  std::map<std::pair<std::string, std::string>, std::vector<const PValueCell*>> series;
  for (const auto& c : result.cells) {
    series[{c.alternative.label(), c.test.label()}].push_back(&c);
  }
  for (auto& [key, cells] : series) {
    std::sort(cells.begin(), cells.end(), [](auto* a, auto* b) { return a->n < b->n; });
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const double prev = cells[i - 1]->estimate;
      const double cur = cells[i]->estimate;
      if (std::isfinite(prev) && std::isfinite(cur) && cur > prev) {
        std::ostringstream msg;
        msg << "trend: " << key.second << " on " << key.first << " rises from " << prev
            << " (n=" << cells[i - 1]->n << ") to " << cur << " (n=" << cells[i]->n << ")";
        result.diagnostics.push_back(msg.str());
      }
    }
  }
  return result;
}

}  // namespace bahadur_lab
