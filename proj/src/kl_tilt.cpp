#include "bahadur_lab/kl_tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "detail/tilt_solver.hpp"

namespace bahadur_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solves the k x k system a x = rhs in place (partial pivoting). Returns false
// on a vanishing pivot.
bool solve_dense(std::vector<double>& a, std::vector<double>& rhs, std::size_t k) {
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::fabs(a[r * k + c]) > std::fabs(a[piv * k + c])) piv = r;
    }
    if (!(std::fabs(a[piv * k + c]) > 0.0)) return false;
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
      std::swap(rhs[c], rhs[piv]);
    }
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = a[r * k + c] / a[c * k + c];
      for (std::size_t j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t c = k; c-- > 0;) {
    double s = rhs[c];
    for (std::size_t j = c + 1; j < k; ++j) s -= a[c * k + j] * rhs[j];
    rhs[c] = s / a[c * k + c];
  }
  return true;
}

class DualState {
 public:
  DualState(const detail::TiltProblem& problem, std::span<const double> log_p)
      : problem_(problem), log_p_(log_p), h_(log_p.size()), q_(log_p.size()) {}

  // Evaluates the dual at `lambda`; fills q and the log-partition.
  double evaluate(std::span<const double> lambda) {
    const std::size_t m = log_p_.size();
    std::fill(h_.begin(), h_.end(), 0.0);
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      if (lambda[j] == 0.0) continue;
      const auto row = problem_.rows[j];
      for (std::size_t i = 0; i < m; ++i) h_[i] += lambda[j] * row[i];
    }
    double top = -kInf;
    for (std::size_t i = 0; i < m; ++i) {
      q_[i] = log_p_[i] + h_[i];
      top = std::max(top, q_[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      q_[i] = std::exp(q_[i] - top);
      z += q_[i];
    }
    for (auto& v : q_) v /= z;
    log_partition_ = top + std::log(z);
    double dual = -log_partition_;
    for (std::size_t j = 0; j < lambda.size(); ++j) dual += lambda[j] * problem_.bounds[j];
    return dual;
  }

  double expectation(std::size_t j) const {
    const auto row = problem_.rows[j];
    double s = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) s += q_[i] * row[i];
    return s;
  }

  double relative_entropy() const {
    double s = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) s += q_[i] * h_[i];
    return std::max(0.0, s - log_partition_);
  }

  const std::vector<double>& q() const { return q_; }

 private:
  const detail::TiltProblem& problem_;
  std::span<const double> log_p_;
  std::vector<double> h_;
  std::vector<double> q_;
  double log_partition_ = 0.0;
};

TiltResult failed(TiltStatus status, std::vector<double> lambda, int iterations, double residual) {
  return {status, kInf, {}, std::move(lambda), iterations, residual};
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size()) {
    throw DomainError("measure needs matching nonempty support and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!std::isfinite(support_[i]) || (i > 0 && !(support_[i] > support_[i - 1]))) {
      throw DomainError("measure support must be finite and strictly increasing");
    }
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw DomainError("measure weights must be nonnegative");
    }
    total += weights_[i];
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> support) {
  const std::size_t m = support.size();
  return {std::move(support), std::vector<double>(m, m ? 1.0 / static_cast<double>(m) : 0.0)};
}

double DiscreteMeasure::cdf(double s) const {
  const auto end = std::upper_bound(support_.begin(), support_.end(), s);
  return std::accumulate(weights_.begin(), weights_.begin() + (end - support_.begin()), 0.0);
}

double DiscreteMeasure::expectation(std::span<const double> f) const {
  if (f.size() != weights_.size()) throw DomainError("coefficient size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * f[i];
  return s;
}

double DiscreteMeasure::relative_entropy(const DiscreteMeasure& reference) const {
  if (reference.size() != size()) throw DomainError("support size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] == 0.0) continue;
    if (reference.weights_[i] == 0.0) return kInf;
    s += weights_[i] * std::log(weights_[i] / reference.weights_[i]);
  }
  return std::max(0.0, s);
}

ConstraintSet& ConstraintSet::add(LinearConstraint constraint) {
  if (!std::isfinite(constraint.bound)) throw DomainError("constraint bound must be finite");
  items_.push_back(std::move(constraint));
  return *this;
}

ConstraintSet& ConstraintSet::equal(std::vector<double> coefficients, double bound,
                                    std::string label) {
  return add({std::move(coefficients), Relation::Equal, bound, std::move(label)});
}

ConstraintSet& ConstraintSet::at_least(std::vector<double> coefficients, double bound,
                                       std::string label) {
  return add({std::move(coefficients), Relation::AtLeast, bound, std::move(label)});
}

ConstraintSet& ConstraintSet::tail_mass(std::span<const double> support, double t,
                                        Relation relation, double bound) {
  std::vector<double> f(support.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = support[i] <= t ? 1.0 : 0.0;
  return add({std::move(f), relation, bound, "tail_mass"});
}

ConstraintSet& ConstraintSet::tail_mass_at_most(std::span<const double> support, double t,
                                                double bound) {
  std::vector<double> f(support.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = support[i] <= t ? -1.0 : 0.0;
  return add({std::move(f), Relation::AtLeast, -bound, "tail_mass_at_most"});
}

ConstraintSet& ConstraintSet::mean(std::span<const double> support, double a) {
  return add({{support.begin(), support.end()}, Relation::Equal, a, "mean"});
}

ConstraintSet& ConstraintSet::second_moment(std::span<const double> support, double b) {
  std::vector<double> f(support.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = support[i] * support[i];
  return add({std::move(f), Relation::Equal, b, "second_moment"});
}

double ConstraintSet::slack(std::size_t j, std::span<const double> weights) const {
  const auto& c = items_.at(j);
  if (c.coefficients.size() != weights.size()) throw DomainError("coefficient size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * c.coefficients[i];
  return s - c.bound;
}

namespace detail {

TiltResult solve_tilt(const TiltProblem& problem, const TiltOptions& options,
                      std::span<const double> start) {
  const std::size_t m = problem.reference.size();
  const std::size_t k = problem.rows.size();
  std::vector<double> lambda(k, 0.0);
  if (!start.empty() && start.size() == k) {
    for (std::size_t j = 0; j < k; ++j) {
      lambda[j] = problem.relations[j] == Relation::AtLeast ? std::max(0.0, start[j]) : start[j];
    }
  }

  // Bounds outside the range of a row can never be met.
  for (std::size_t j = 0; j < k; ++j) {
    const auto row = problem.rows[j];
    if (row.size() != m) throw DomainError("coefficient size mismatch");
    double lo = kInf;
    double hi = -kInf;
    for (std::size_t i = 0; i < m; ++i) {
      if (problem.reference[i] <= 0.0) continue;
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
    }
    const double b = problem.bounds[j];
    if (b > hi || (problem.relations[j] == Relation::Equal && b < lo)) {
      return failed(TiltStatus::Infeasible, std::vector<double>(k, 0.0), 0, kInf);
    }
  }

  std::vector<double> own_log_p;
  std::span<const double> log_p = problem.log_reference;
  if (log_p.size() != m) {
    own_log_p.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      own_log_p[i] = problem.reference[i] > 0.0 ? std::log(problem.reference[i]) : -kInf;
    }
    log_p = own_log_p;
  }
  DualState state(problem, log_p);
  double dual = state.evaluate(lambda);

  std::vector<double> grad(k), expect(k), hess, rhs, trial(k);
  std::vector<std::size_t> free;
  std::vector<double> centered;
  double residual = kInf;
  int iter = 0;
  for (;; ++iter) {
    residual = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      expect[j] = state.expectation(j);
      grad[j] = problem.bounds[j] - expect[j];
      const bool pinned = problem.relations[j] == Relation::AtLeast && lambda[j] == 0.0;
      residual = std::max(residual, pinned ? std::max(grad[j], 0.0) : std::fabs(grad[j]));
    }
    if (residual <= options.tolerance) break;
    if (iter >= options.max_iterations) {
      return failed(TiltStatus::MaxIterations, std::move(lambda), iter, residual);
    }

    free.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (problem.relations[j] == Relation::Equal || lambda[j] > 0.0 || grad[j] > 0.0) {
        free.push_back(j);
      }
    }
    const std::size_t f = free.size();
    hess.assign(f * f, 0.0);
    rhs.resize(f);
    const auto& q = state.q();
    centered.resize(f);
    for (std::size_t i = 0; i < m; ++i) {
      if (q[i] == 0.0) continue;
      for (std::size_t a = 0; a < f; ++a) centered[a] = problem.rows[free[a]][i] - expect[free[a]];
      for (std::size_t a = 0; a < f; ++a) {
        const double wa = q[i] * centered[a];
        for (std::size_t b = 0; b <= a; ++b) hess[a * f + b] += wa * centered[b];
      }
    }
    double scale = 0.0;
    for (std::size_t a = 0; a < f; ++a) {
      for (std::size_t b = 0; b < a; ++b) hess[b * f + a] = hess[a * f + b];
      scale = std::max(scale, hess[a * f + a]);
      rhs[a] = grad[free[a]];
    }
    const double ridge = 1e-13 * scale + 1e-300;
    for (std::size_t a = 0; a < f; ++a) hess[a * f + a] += ridge;
    if (!solve_dense(hess, rhs, f)) {
      return failed(TiltStatus::MaxIterations, std::move(lambda), iter, residual);
    }

    // Near the optimum the dual gain falls below round-off; a full Newton
    // step is then taken on the strength of its predicted gain.
    double predicted = 0.0;
    for (std::size_t a = 0; a < f; ++a) predicted += rhs[a] * grad[free[a]];
    const double noise = 1e-13 * (1.0 + std::fabs(dual));
    bool accepted = false;
    double step = 1.0;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      trial = lambda;
      for (std::size_t a = 0; a < f; ++a) {
        const std::size_t j = free[a];
        trial[j] += step * rhs[a];
        if (problem.relations[j] == Relation::AtLeast) trial[j] = std::max(0.0, trial[j]);
      }
      const double next = state.evaluate(trial);
      if (next > dual || (halving == 0 && predicted < noise && next >= dual - noise)) {
        lambda.swap(trial);
        dual = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      state.evaluate(lambda);
      if (residual <= 1e-9) break;
      return failed(TiltStatus::MaxIterations, std::move(lambda), iter, residual);
    }
    double norm = 0.0;
    for (double l : lambda) norm = std::max(norm, std::fabs(l));
    if (norm > options.divergence_norm) {
      return failed(TiltStatus::Infeasible, std::move(lambda), iter + 1, residual);
    }
  }

  const bool untilted = std::all_of(lambda.begin(), lambda.end(), [](double l) { return l == 0.0; });
  TiltResult out{TiltStatus::Converged, untilted ? 0.0 : state.relative_entropy(), state.q(),
                 std::move(lambda), iter, residual};
  if (untilted) out.weights.assign(problem.reference.begin(), problem.reference.end());
  return out;
}

}  // namespace detail

TiltResult min_kl_tilt(const DiscreteMeasure& reference, const ConstraintSet& constraints,
                       const TiltOptions& options) {
  detail::TiltProblem problem{reference.weights(), {}, {}, {}};
  for (const auto& c : constraints.constraints()) {
    problem.rows.emplace_back(c.coefficients);
    problem.relations.push_back(c.relation);
    problem.bounds.push_back(c.bound);
  }
  return detail::solve_tilt(problem, options);
}

DiscreteMeasure minimizer(const DiscreteMeasure& reference, const TiltResult& result) {
  if (result.status == TiltStatus::Infeasible) throw Infeasible("constraint set is infeasible");
  if (result.status != TiltStatus::Converged) {
    throw NumericalFailure("tilt solver stopped after " + std::to_string(result.iterations) +
                           " iterations, KKT residual " + std::to_string(result.kkt_residual));
  }
  std::vector<double> w = result.weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return {{reference.support().begin(), reference.support().end()}, std::move(w)};
}

GaussianPartition::GaussianPartition(const PartitionParams& params)
    : measure_({0.0}, {1.0}) {
  const std::size_t m = params.atoms;
  const double tail = params.tail_probability;
  if (m < 3) throw DomainError("partition needs at least 3 cells");
  if (!(tail > 0.0 && tail < 0.5)) throw DomainError("tail probability must lie in (0, 0.5)");

  // Cumulative probabilities of the boundaries, built from both ends so that
  // upper-tail cells keep relative precision.
  const double interior = (1.0 - 2.0 * tail) / static_cast<double>(m - 2);
  lower_.resize(m + 1);
  upper_.resize(m + 1);
  lower_[0] = 0.0;
  upper_[m] = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    lower_[k] = tail + interior * static_cast<double>(k - 1);
    upper_[m - k] = tail + interior * static_cast<double>(k - 1);
  }
  lower_[m] = 1.0;
  upper_[0] = 1.0;
  masses_.assign(m, interior);
  masses_.front() = tail;
  masses_.back() = tail;

  boundaries_.resize(m - 1);
  for (std::size_t k = 1; k < m; ++k) {
    boundaries_[k - 1] =
        lower_[k] <= 0.5 ? std_normal_quantile(lower_[k]) : -std_normal_quantile(upper_[k]);
  }

  means_.resize(m);
  second_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = k == 0 ? -kInf : boundaries_[k - 1];
    const double hi = k + 1 == m ? kInf : boundaries_[k];
    const double pdf_lo = std::isfinite(lo) ? std_normal_pdf(lo) : 0.0;
    const double pdf_hi = std::isfinite(hi) ? std_normal_pdf(hi) : 0.0;
    const double lo_term = std::isfinite(lo) ? lo * pdf_lo : 0.0;
    const double hi_term = std::isfinite(hi) ? hi * pdf_hi : 0.0;
    means_[k] = (pdf_lo - pdf_hi) / masses_[k];
    second_[k] = 1.0 + (lo_term - hi_term) / masses_[k];
  }
  measure_ = DiscreteMeasure(means_, masses_);
}

std::vector<double> GaussianPartition::tail_mass_coefficients(double s) const {
  if (std::isnan(s)) throw DomainError("tail point is NaN");
  const std::size_t m = size();
  std::vector<double> f(m, 0.0);
  const std::size_t cell = static_cast<std::size_t>(
      std::upper_bound(boundaries_.begin(), boundaries_.end(), s) - boundaries_.begin());
  for (std::size_t k = 0; k < cell; ++k) f[k] = 1.0;
  if (cell > 0 && boundaries_[cell - 1] == s) return f;
  double frac = 0.0;
  if (s <= 0.0) {
    frac = (std_normal_cdf(s) - lower_[cell]) / masses_[cell];
  } else {
    frac = (upper_[cell] - std_normal_survival(s)) / masses_[cell];
  }
  f[cell] = std::clamp(frac, 0.0, 1.0);
  return f;
}

double GaussianPartition::lifted_cdf(std::span<const double> q, double s) const {
  if (q.size() != size()) throw DomainError("weight size mismatch");
  const auto f = tail_mass_coefficients(s);
  double total = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) total += q[k] * f[k];
  return total;
}

}  // namespace bahadur_lab
