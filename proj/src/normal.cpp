#include "bahadur_lab/normal.hpp"

#include <cmath>
#include <string>

#include "bahadur_lab/errors.hpp"

namespace bahadur_lab {
namespace {

// AS241 (PPND16), lower-tail deviate accurate to about 1 part in 1e16.
double as241(double p) {
  constexpr double a[] = {3.3871328727963666080E0, 1.3314166789178437745E+2,
                          1.9715909503065514427E+3, 1.3731693765509461125E+4,
                          4.5921953931549871457E+4, 6.7265770927008700853E+4,
                          3.3430575583588128105E+4, 2.5090809287301226727E+3};
  constexpr double b[] = {1.0,
                          4.2313330701600911252E+1, 6.8718700749205790830E+2,
                          5.3941960214247511077E+3, 2.1213794301586595867E+4,
                          3.9307895800092710610E+4, 2.8729085735721942674E+4,
                          5.2264952788528545610E+3};
  constexpr double c[] = {1.42343711074968357734E0, 4.63033784615654529590E0,
                          5.76949722146069140550E0, 3.64784832476320460504E0,
                          1.27045825245236838258E0, 2.41780725177450611770E-1,
                          2.27238449892691845833E-2, 7.74545014278341407640E-4};
  constexpr double d[] = {1.0,
                          2.05319162663775882187E0, 1.67638483018380384940E0,
                          6.89767334985100004550E-1, 1.48103976427480074590E-1,
                          1.51986665636164571966E-2, 5.47593808499534494600E-4,
                          1.05075007164441684324E-9};
  constexpr double e[] = {6.65790464350110377720E0, 5.46378491116411436990E0,
                          1.78482653991729133580E0, 2.96560571828504891230E-1,
                          2.65321895265761230930E-2, 1.24266094738807843860E-3,
                          2.71155556874348757815E-5, 2.01033439929228813265E-7};
  constexpr double f[] = {1.0,
                          5.99832206555887937690E-1, 1.36929880922735805310E-1,
                          1.48753612908506148525E-2, 7.86869131145613259100E-4,
                          1.84631831751005468180E-5, 1.42151175831644588870E-7,
                          2.04426310338993978564E-15};
  auto ratio = [](const double* num, const double* den, double r) {
    double n = num[7];
    double m = den[7];
    for (int i = 6; i >= 0; --i) {
      n = n * r + num[i];
      m = m * r + den[i];
    }
    return n / m;
  };

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    return q * ratio(a, b, 0.180625 - q * q);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  const double z = r <= 5.0 ? ratio(c, d, r - 1.6) : ratio(e, f, r - 5.0);
  return q < 0.0 ? -z : z;
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw DomainError("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_survival(double x) {
  if (std::isnan(x)) throw DomainError("std_normal_survival: NaN argument");
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
  }
  // Work in the lower tail; 1 - p is exact for p >= 0.5.
  if (p > 0.5) return -std_normal_quantile(1.0 - p);
  double x = as241(p);
  const double density = std_normal_pdf(x);
  if (density > 0.0) x -= (std_normal_cdf(x) - p) / density;
  return x;
}

}  // namespace bahadur_lab
