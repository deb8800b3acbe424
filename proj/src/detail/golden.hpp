#pragma once

#include <cmath>
#include <utility>

namespace bahadur_lab::detail {

/// Golden-section search for a maximum of f on [lo, hi]. Returns the best
/// abscissa seen and its value. Assumes f is unimodal on the bracket; for
/// other shapes it still returns a point no worse than the endpoints' best
/// interior probe.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double x_tol = 1e-13,
                                     int max_iter = 200) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace bahadur_lab::detail
