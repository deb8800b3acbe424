#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bahadur_lab {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

}  // namespace

WeightFunction WeightFunction::unit() { return {Kind::Unit, 1.0}; }

WeightFunction WeightFunction::anderson_darling() { return {Kind::AndersonDarling, 1.0}; }

WeightFunction WeightFunction::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw DomainError("weight table needs matching, nonempty knot and value lists");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i]) || values[i] < 0.0) {
      throw DomainError("weight table entries must be finite with nonnegative values");
    }
    if (i > 0 && !(knots[i] > knots[i - 1])) {
      throw DomainError("weight table knots must be strictly increasing");
    }
  }
  WeightFunction w(Kind::Table, 1.0);
  w.knots_ = std::move(knots);
  w.values_ = std::move(values);
  return w;
}

WeightFunction WeightFunction::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("weight scale must be positive");
  WeightFunction w = *this;
  w.scale_ *= c;
  return w;
}

double WeightFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::Unit:
      return scale_;
    case Kind::AndersonDarling:
      if (!(x > 0.0 && x < 1.0)) return std::numeric_limits<double>::infinity();
      return scale_ / (x * (1.0 - x));
    case Kind::Table: {
      if (x <= knots_.front()) return scale_ * values_.front();
      if (x >= knots_.back()) return scale_ * values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      const auto hi = static_cast<std::size_t>(it - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
      return scale_ * ((1.0 - w) * values_[lo] + w * values_[hi]);
    }
  }
  return 0.0;
}

double WeightFunction::supremum() const {
  switch (kind_) {
    case Kind::Unit: return scale_;
    case Kind::AndersonDarling: return std::numeric_limits<double>::infinity();
    case Kind::Table: return scale_ * *std::max_element(values_.begin(), values_.end());
  }
  return 0.0;
}

double WeightFunction::max_slope() const {
  switch (kind_) {
    case Kind::Unit: return 0.0;
    case Kind::AndersonDarling: return std::numeric_limits<double>::infinity();
    case Kind::Table: {
      double s = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        s = std::max(s, std::fabs(values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
      }
      return scale_ * s;
    }
  }
  return 0.0;
}

std::string WeightFunction::name() const {
  std::string base = kind_ == Kind::Unit ? "unit" : kind_ == Kind::AndersonDarling ? "ad" : "table";
  if (scale_ != 1.0) base += "*" + shortest(scale_);
  return base;
}

TestKind TestKind::lilliefors(WeightFunction psi) {
  if (!psi.bounded()) throw DomainError("lilliefors statistic needs a bounded weight");
  TestKind t(Id::Lilliefors);
  t.psi_ = std::move(psi);
  return t;
}

TestKind TestKind::weighted_cvm(WeightFunction psi) {
  TestKind t(Id::WeightedCvM);
  t.psi_ = std::move(psi);
  return t;
}

TestKind TestKind::bhep(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("BHEP beta must be positive");
  TestKind t(Id::BHEP);
  t.beta_ = beta;
  return t;
}

TestKind TestKind::parse(const std::string& name, const WeightFunction& psi, double beta) {
  const std::string key = lower(name);
  if (key == "ks") return ks();
  if (key == "cvm_simple") return cvm();
  if (key == "ad_simple") return ad();
  if (key == "lilliefors" || key == "l") return lilliefors(psi);
  if (key == "cvm" || key == "cm") return weighted_cvm(WeightFunction::unit());
  if (key == "ad") return weighted_cvm(WeightFunction::anderson_darling());
  if (key == "weighted_cvm") return weighted_cvm(psi);
  if (key == "shapiro_wilk" || key == "sw") return shapiro_wilk();
  if (key == "bhep") return bhep(beta);
  throw DomainError("unknown test '" + name + "'");
}

bool TestKind::studentized() const noexcept {
  return id_ != Id::KS && id_ != Id::CvM && id_ != Id::AD;
}

std::size_t TestKind::min_sample_size() const noexcept {
  switch (id_) {
    case Id::KS:
    case Id::CvM:
    case Id::AD:
      return 1;
    case Id::ShapiroWilk:
      return 3;
    default:
      return 2;
  }
}

std::string TestKind::label() const {
  switch (id_) {
    case Id::KS: return "ks";
    case Id::CvM: return "cvm_simple";
    case Id::AD: return "ad_simple";
    case Id::Lilliefors:
      return psi_ == WeightFunction::unit() ? "lilliefors" : "lilliefors[" + psi_.name() + "]";
    case Id::WeightedCvM:
      if (psi_ == WeightFunction::unit()) return "cvm";
      if (psi_ == WeightFunction::anderson_darling()) return "ad";
      return "weighted_cvm[" + psi_.name() + "]";
    case Id::ShapiroWilk: return "shapiro_wilk";
    case Id::BHEP: return beta_ == 1.0 ? "bhep" : "bhep[" + shortest(beta_) + "]";
  }
  return "unknown";
}

std::uint64_t TestKind::stable_id() const noexcept {
  // FNV-1a over the label, so kinds sharing an Id but not a weight differ.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace bahadur_lab
