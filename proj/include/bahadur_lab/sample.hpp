#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bahadur_lab {

/// Observations kept in ascending order together with the sample mean and the
/// standard deviation with divisor n - 1 (zero when n = 1).
class Sample {
 public:
  /// Sorts `values`. Throws DomainError when empty or when any value is not
  /// finite.
  explicit Sample(std::vector<double> values);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double sd() const noexcept { return sd_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// True when every observation is identical.
  [[nodiscard]] bool constant() const noexcept { return values_.front() == values_.back(); }

  /// z_i = (x_(i) - mean) / sd in ascending order. Throws DegenerateSample when
  /// n < 2 or the sample is constant.
  [[nodiscard]] std::vector<double> studentized() const;

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double sd_ = 0.0;
};

}  // namespace bahadur_lab
