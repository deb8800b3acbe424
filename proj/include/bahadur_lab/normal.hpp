#pragma once

namespace bahadur_lab {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
[[nodiscard]] double std_normal_pdf(double x);

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision. Throws DomainError on NaN.
[[nodiscard]] double std_normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
[[nodiscard]] double std_normal_survival(double x);

/// Inverse of std_normal_cdf on (0,1). Wichura's AS241 rational
/// approximation followed by one Newton step against std_normal_cdf, so that
/// |Phi(quantile(p)) - p| <= 1e-12. Throws DomainError outside (0,1).
[[nodiscard]] double std_normal_quantile(double p);

}  // namespace bahadur_lab
