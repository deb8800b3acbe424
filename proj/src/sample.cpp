#include "bahadur_lab/sample.hpp"

#include <algorithm>
#include <cmath>

#include "bahadur_lab/errors.hpp"

namespace bahadur_lab {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("Sample: no observations");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("Sample: non-finite observation");
  }
  std::sort(values_.begin(), values_.end());

  const auto n = static_cast<double>(values_.size());
  double sum = 0.0;
  for (double v : values_) sum += v;
  mean_ = sum / n;
  if (values_.size() > 1 && !constant()) {
    double ss = 0.0;
    for (double v : values_) ss += (v - mean_) * (v - mean_);
    sd_ = std::sqrt(ss / (n - 1.0));
  }
}

std::vector<double> Sample::studentized() const {
  if (values_.size() < 2) throw DegenerateSample("studentized statistic needs n >= 2");
  if (constant() || !(sd_ > 0.0)) {
    throw DegenerateSample("sample has zero spread; studentization undefined");
  }
  std::vector<double> z(values_.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (values_[i] - mean_) / sd_;
  return z;
}

}  // namespace bahadur_lab
