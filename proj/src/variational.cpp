#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/normal.hpp"
#include "detail/parallel.hpp"
#include "detail/tilt_solver.hpp"
#include "detail/weighted_density.hpp"

namespace bahadur_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailClip = 37.0;

std::vector<double> index_grid(double lo, double hi, int divisions) {
  if (divisions < 1) throw DomainError("grid divisions must be positive");
  const double d = divisions;
  std::vector<double> out;
  const auto first = static_cast<long>(std::ceil(lo * d - 1e-9));
  const auto last = static_cast<long>(std::floor(hi * d + 1e-9));
  for (long i = first; i <= last; ++i) out.push_back(static_cast<double>(i) / d);
  return out;
}

}  // namespace

GridParams GridParams::refined() const {
  GridParams g = *this;
  g.reference = reference.refined();
  g.t_points = 2 * t_points - 1;
  g.a_divisions = 2 * a_divisions;
  g.b_divisions = 2 * b_divisions;
  g.deviation_levels = 2 * deviation_levels;
  ++g.refinements;
  return g;
}

GridParams GridParams::coarser() const {
  if (refinements == 0) throw DomainError("grid was not produced by refined()");
  GridParams g = *this;
  g.reference = {(reference.atoms + 2) / 2, reference.tail_probability};
  g.t_points = (t_points + 1) / 2;
  g.a_divisions = a_divisions / 2;
  g.b_divisions = b_divisions / 2;
  g.deviation_levels = deviation_levels / 2;
  --g.refinements;
  return g;
}

std::vector<double> GridParams::t_grid() const {
  if (t_points < 2 || !(t_max > t_min)) throw DomainError("t grid needs two points on a range");
  std::vector<double> out(t_points);
  const double span = t_max - t_min;
  const double steps = static_cast<double>(t_points - 1);
  for (std::size_t i = 0; i < t_points; ++i) {
    out[i] = t_min + (span * static_cast<double>(i)) / steps;
  }
  return out;
}

std::vector<std::pair<double, double>> GridParams::moment_grid() const {
  if (pinned_moments) {
    const auto [a, b] = *pinned_moments;
    if (!(b > a * a)) throw DomainError("pinned moments need b > a^2");
    return {*pinned_moments};
  }
  if (!moment_constraints) return {{0.0, 1.0}};
  std::vector<std::pair<double, double>> out;
  for (double a : index_grid(a_min, a_max, a_divisions)) {
    for (double b : index_grid(b_min, b_max, b_divisions)) {
      if (b - a * a > 1e-12) out.emplace_back(a, b);
    }
  }
  if (out.empty()) throw DomainError("moment grid is empty");
  return out;
}

VariationalSolver::VariationalSolver(GridParams grid)
    : grid_(std::move(grid)), partition_(grid_.reference) {
  const auto w = partition_.measure().weights();
  log_weights_.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) log_weights_[i] = std::log(w[i]);
}

double VariationalSolver::sigma(double a, double b) const { return std::sqrt(b - a * a); }

TiltResult VariationalSolver::solve_cell(const CellSpec& cell, double deviation,
                                         std::span<const double> start) const {
  if (cell.sign != 1 && cell.sign != -1) throw DomainError("cell sign must be +1 or -1");
  const double s = cell.a + sigma(cell.a, cell.b) * cell.t;
  auto tail = partition_.tail_mass_coefficients(s);
  double bound = 0.0;
  if (cell.sign > 0) {
    bound = std_normal_cdf(cell.t) + deviation;
  } else {
    for (auto& v : tail) v = -v;
    bound = -(std_normal_cdf(cell.t) - deviation);
  }
  detail::TiltProblem problem{partition_.measure().weights(), {tail}, {Relation::AtLeast},
                              {bound}, log_weights_};
  if (grid_.moment_constraints) {
    problem.rows.emplace_back(partition_.mean_coefficients());
    problem.rows.emplace_back(partition_.second_moment_coefficients());
    problem.relations.insert(problem.relations.end(), {Relation::Equal, Relation::Equal});
    problem.bounds.insert(problem.bounds.end(), {cell.a, cell.b});
  }
  return detail::solve_tilt(problem, grid_.tilt, start);
}

TiltResult VariationalSolver::moment_solution(double a, double b) const {
  detail::TiltProblem problem{partition_.measure().weights(),
                              {partition_.mean_coefficients(),
                               partition_.second_moment_coefficients()},
                              {Relation::Equal, Relation::Equal},
                              {a, b},
                              log_weights_};
  return detail::solve_tilt(problem, grid_.tilt);
}

double VariationalSolver::moment_entropy(double a, double b) const {
  if (!grid_.moment_constraints) return 0.0;
  const auto r = moment_solution(a, b);
  return r.status == TiltStatus::Converged ? r.kl : kInf;
}

VariationalSolver::Block VariationalSolver::make_block(double a, double b, std::size_t index) const {
  if (!grid_.moment_constraints) return {a, b, 0.0, index, {}};
  const auto r = moment_solution(a, b);
  if (r.status != TiltStatus::Converged) return {a, b, kInf, index, {}};
  return {a, b, r.kl, index, {0.0, r.multipliers[0], r.multipliers[1]}};
}

double VariationalSolver::deviation_integral(std::span<const double> q, const WeightFunction& psi,
                                             double a, double b) const {
  const std::size_t m = partition_.size();
  if (q.size() != m) throw DomainError("weight size mismatch");
  const auto lower = partition_.cumulative_lower();
  const auto upper = partition_.cumulative_upper();
  const auto masses = partition_.measure().weights();

  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) cum[k + 1] = cum[k] + q[k];

  const bool standard = a == 0.0 && b == 1.0;
  if (standard && psi.kind() == WeightFunction::Kind::Unit) {
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double y0 = cum[k] - lower[k];
      const double y1 = k + 1 == m ? 0.0 : cum[k + 1] - lower[k + 1];
      total += masses[k] * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0;
    }
    return psi.scale() * total;
  }
  if (standard && psi.kind() == WeightFunction::Kind::AndersonDarling) {
    // Within a cell the deviation y(v) = x - v is linear in v = Phi(t).
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double p = masses[k];
      const double beta = q[k] / p - 1.0;
      const double y0 = cum[k] - lower[k];
      const double lo = lower[k];
      const double hi = lower[k + 1];
      const double w_lo = upper[k];
      const double w_hi = upper[k + 1];
      double left = 0.0;
      if (k == 0) {
        left = 0.5 * beta * beta * hi * hi;
      } else {
        const double alpha = y0 - beta * lo;
        left = alpha * alpha * std::log1p(p / lo) + 2.0 * alpha * beta * p +
               0.5 * beta * beta * p * (lo + hi);
      }
      double right = 0.0;
      if (k + 1 == m) {
        right = 0.5 * beta * beta * w_lo * w_lo;
      } else {
        const double gamma = y0 + beta * w_lo;
        right = gamma * gamma * std::log1p(p / w_hi) - 2.0 * gamma * beta * p +
                0.5 * beta * beta * p * (w_lo + w_hi);
      }
      total += left + right;
    }
    return psi.scale() * total;
  }

  const double sd = sigma(a, b);
  const auto bounds = partition_.boundaries();
  auto piece = [&](std::size_t k) {
    return [&, k](double t) {
      const double s = a + sd * t;
      double frac = s <= 0.0 ? (std_normal_cdf(s) - lower[k]) / masses[k]
                             : (upper[k] - std_normal_survival(s)) / masses[k];
      frac = std::clamp(frac, 0.0, 1.0);
      const double d = cum[k] + q[k] * frac - std_normal_cdf(t);
      return d * d * detail::weighted_normal_density(psi, t);
    };
  };
  using Fixed = boost::math::quadrature::gauss<double, 5>;
  using Adaptive = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double lo = k == 0 ? -kTailClip : (bounds[k - 1] - a) / sd;
    double hi = k + 1 == m ? kTailClip : (bounds[k] - a) / sd;
    lo = std::max(lo, -kTailClip);
    hi = std::min(hi, kTailClip);
    if (!(hi > lo)) continue;
    const auto f = piece(k);
    total += hi - lo < 0.25 ? Fixed::integrate(f, lo, hi) : Adaptive::integrate(f, lo, hi, 12, 1e-12);
  }
  return total;
}

BoundResult VariationalSolver::lilliefors_bound(double u, const WeightFunction& psi) const {
  if (!(u >= 0.0)) throw DomainError("deviation level must be nonnegative");
  if (!psi.bounded()) throw DomainError("the sup bound needs a bounded weight");

  const auto moments = grid_.moment_grid();
  std::vector<Block> blocks(moments.size());
  detail::parallel_for(moments.size(), grid_.threads, [&](std::size_t i) {
    blocks[i] = make_block(moments[i].first, moments[i].second, i);
  });
  std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) {
    return x.entropy != y.entropy ? x.entropy < y.entropy : x.index < y.index;
  });

  const auto uniform_t = grid_.t_grid();
  BoundResult out{kInf, std::nullopt, 0.0, {}, 0, 0};
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& blk = blocks[bi];
    if (!(blk.entropy < out.value)) {
      out.blocks_pruned = blocks.size() - bi;
      break;
    }
    std::vector<double> ts = uniform_t;
    if (grid_.partition_points) {
      const double sd = sigma(blk.a, blk.b);
      for (double c : partition_.boundaries()) {
        const double t = (c - blk.a) / sd;
        if (t >= grid_.t_min && t <= grid_.t_max) ts.push_back(t);
      }
      std::sort(ts.begin(), ts.end());
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }
    const std::size_t cells = 2 * ts.size();
    std::vector<double> kl(cells, kInf);
    detail::parallel_for(cells, grid_.threads, [&](std::size_t c) {
      const CellSpec cell{ts[c / 2], c % 2 == 0 ? 1 : -1, blk.a, blk.b};
      const double w = psi(cell.t);
      if (!(w > 0.0) && u > 0.0) return;
      const double d = u > 0.0 ? u / w : 0.0;
      const auto r = solve_cell(cell, d, blk.start);
      if (r.status == TiltStatus::Converged) kl[c] = r.kl;
    });
    out.cells_solved += cells;
    std::size_t arg = cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (kl[c] < out.value) {
        out.value = kl[c];
        arg = c;
      }
    }
    if (arg < cells) {
      out.cell = CellSpec{ts[arg / 2], arg % 2 == 0 ? 1 : -1, blk.a, blk.b};
      out.deviation = u > 0.0 ? u / psi(out.cell->t) : 0.0;
    }
  }
  if (out.cell) out.weights = solve_cell(*out.cell, out.deviation).weights;
  return out;
}

double VariationalSolver::cell_search(double u, const WeightFunction& psi, const CellSpec& cell,
                                      double cap, std::span<const double> start,
                                      double* deviation) const {
  *deviation = 0.0;
  if (u <= 0.0) {
    const auto r = solve_cell(cell, 0.0, start);
    return r.status == TiltStatus::Converged ? r.kl : kInf;
  }
  const double room = cell.sign > 0 ? std_normal_survival(cell.t) : std_normal_cdf(cell.t);
  const std::size_t levels = std::max<std::size_t>(grid_.deviation_levels, 2);

  struct Probe {
    double d;
    double kl;
    double integral;
    std::vector<double> multipliers;
  };
  auto probe = [&](double d, std::span<const double> start) -> std::optional<Probe> {
    const auto r = solve_cell(cell, d, start);
    if (r.status != TiltStatus::Converged) return std::nullopt;
    return Probe{d, r.kl, deviation_integral(r.weights, psi, cell.a, cell.b), r.multipliers};
  };

  Probe lo{0.0, 0.0, 0.0, {start.begin(), start.end()}};
  std::optional<Probe> hi;
  for (std::size_t j = 1; j < levels; ++j) {
    const double frac = static_cast<double>(j) / static_cast<double>(levels);
    const double d = room * frac * frac;
    auto p = probe(d, lo.multipliers);
    if (!p) {
      // Past the feasible range: bisect back towards the last feasible level.
      double bad = d;
      for (int it = 0; it < 40 && bad - lo.d > 1e-9 * bad; ++it) {
        const double mid = 0.5 * (lo.d + bad);
        auto q = probe(mid, lo.multipliers);
        if (!q) {
          bad = mid;
        } else if (q->integral >= u) {
          p = std::move(q);
          break;
        } else {
          lo = std::move(*q);
        }
      }
      if (!p) return kInf;
    }
    if (!(p->kl < cap)) return kInf;
    if (p->integral >= u) {
      hi = std::move(p);
      break;
    }
    lo = std::move(*p);
  }
  if (!hi) return kInf;

  // Illinois regula falsi on integral(d) - u, keeping hi feasible.
  double f_lo = lo.integral - u;
  double f_hi = hi->integral - u;
  int side = 0;
  for (int it = 0; it < 60; ++it) {
    if (hi->d - lo.d <= 1e-10 * hi->d || f_hi <= 1e-12 * u) break;
    double d = (lo.d * f_hi - hi->d * f_lo) / (f_hi - f_lo);
    if (!(d > lo.d && d < hi->d)) d = 0.5 * (lo.d + hi->d);
    auto p = probe(d, hi->multipliers);
    if (!p) {
      lo.d = d;
      continue;
    }
    const double f = p->integral - u;
    if (f >= 0.0) {
      hi = std::move(p);
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    } else {
      lo = std::move(*p);
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    }
  }
  *deviation = hi->d;
  return hi->kl;
}

BoundResult VariationalSolver::integral_bound(double u, const WeightFunction& psi,
                                              std::span<const CellSpec> cells) const {
  if (!(u >= 0.0)) throw DomainError("deviation level must be nonnegative");
  BoundResult out{kInf, std::nullopt, 0.0, {}, 0, 0};
  std::vector<double> kl(cells.size(), kInf);
  std::vector<double> dev(cells.size(), 0.0);
  detail::parallel_for(cells.size(), grid_.threads, [&](std::size_t c) {
    kl[c] = cell_search(u, psi, cells[c], kInf, {}, &dev[c]);
  });
  out.cells_solved = cells.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (kl[c] < out.value) {
      out.value = kl[c];
      out.cell = cells[c];
      out.deviation = dev[c];
    }
  }
  if (out.cell) out.weights = solve_cell(*out.cell, out.deviation).weights;
  return out;
}

BoundResult VariationalSolver::integral_bound(double u, const WeightFunction& psi) const {
  if (!(u >= 0.0)) throw DomainError("deviation level must be nonnegative");
  const auto moments = grid_.moment_grid();
  std::vector<Block> blocks(moments.size());
  detail::parallel_for(moments.size(), grid_.threads, [&](std::size_t i) {
    blocks[i] = make_block(moments[i].first, moments[i].second, i);
  });
  std::sort(blocks.begin(), blocks.end(), [](const Block& x, const Block& y) {
    return x.entropy != y.entropy ? x.entropy < y.entropy : x.index < y.index;
  });

  const auto ts = grid_.t_grid();
  BoundResult out{kInf, std::nullopt, 0.0, {}, 0, 0};
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& blk = blocks[bi];
    if (!(blk.entropy < out.value)) {
      out.blocks_pruned = blocks.size() - bi;
      break;
    }
    const std::size_t cells = 2 * ts.size();
    std::vector<double> kl(cells, kInf);
    std::vector<double> dev(cells, 0.0);
    const double cap = out.value;
    detail::parallel_for(cells, grid_.threads, [&](std::size_t c) {
      const CellSpec cell{ts[c / 2], c % 2 == 0 ? 1 : -1, blk.a, blk.b};
      kl[c] = cell_search(u, psi, cell, cap, blk.start, &dev[c]);
    });
    out.cells_solved += cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (kl[c] < out.value) {
        out.value = kl[c];
        out.cell = CellSpec{ts[c / 2], c % 2 == 0 ? 1 : -1, blk.a, blk.b};
        out.deviation = dev[c];
      }
    }
  }
  if (out.cell) out.weights = solve_cell(*out.cell, out.deviation).weights;
  return out;
}

double gli_upper_bound(double u, const WeightFunction& psi, const GridParams& grid) {
  const auto r = VariationalSolver(grid).lilliefors_bound(u, psi);
  if (!std::isfinite(r.value)) throw Infeasible("no grid cell reaches the requested deviation");
  return r.value;
}

double gad_upper_bound(double u, const WeightFunction& psi, const GridParams& grid) {
  double best = VariationalSolver(grid).integral_bound(u, psi).value;
  for (GridParams g = grid; g.refinements > 0;) {
    g = g.coarser();
    best = std::min(best, VariationalSolver(g).integral_bound(u, psi).value);
  }
  if (!std::isfinite(best)) throw Infeasible("no grid cell reaches the requested deviation");
  return best;
}

SlopeEstimate lilliefors_slope(const AlternativeSpec& spec, const WeightFunction& psi,
                               const GridParams& grid) {
  const double d = lilliefors_discrepancy(spec, psi);
  return SlopeEstimate::make(d, gli_upper_bound(d, psi, grid), SlopeEstimate::Kind::UpperBound);
}

SlopeEstimate weighted_cvm_slope(const AlternativeSpec& spec, const WeightFunction& psi,
                                 const GridParams& grid) {
  const double d = ad_discrepancy(spec, psi);
  return SlopeEstimate::make(d, gad_upper_bound(d, psi, grid), SlopeEstimate::Kind::UpperBound);
}

SlopeEstimate test_slope(const AlternativeSpec& spec, const TestKind& test,
                         const GridParams& grid) {
  switch (test.id()) {
    case TestKind::Id::KS:
      return ks_slope(spec);
    case TestKind::Id::Lilliefors:
      return lilliefors_slope(spec, test.psi(), grid);
    case TestKind::Id::WeightedCvM:
      return weighted_cvm_slope(spec, test.psi(), grid);
    default:
      throw Unsupported("no slope computation for test '" + test.label() + "'");
  }
}

}  // namespace bahadur_lab
