#pragma once

#include "bahadur_lab/normal.hpp"
#include "bahadur_lab/statistics.hpp"

namespace bahadur_lab::detail {

/// psi(Phi(t)) phi(t), with the Anderson-Darling shape evaluated as
/// phi / (Phi (1 - Phi)) so it stays finite in both tails.
inline double weighted_normal_density(const WeightFunction& psi, double t) {
  const double pdf = std_normal_pdf(t);
  switch (psi.kind()) {
    case WeightFunction::Kind::Unit:
      return psi.scale() * pdf;
    case WeightFunction::Kind::AndersonDarling:
      return psi.scale() * pdf / (std_normal_cdf(t) * std_normal_survival(t));
    case WeightFunction::Kind::Table:
      break;
  }
  return psi(std_normal_cdf(t)) * pdf;
}

}  // namespace bahadur_lab::detail
