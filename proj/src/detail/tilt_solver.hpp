#pragma once

#include <span>
#include <vector>

#include "bahadur_lab/kl_tilt.hpp"

namespace bahadur_lab::detail {

/// Raw form of a tilt problem: reference weights and constraint rows given as
/// views, so callers can share rows across many solves.
struct TiltProblem {
  std::span<const double> reference;
  std::vector<std::span<const double>> rows;
  std::vector<Relation> relations;
  std::vector<double> bounds;
  /// Optional precomputed log of `reference`.
  std::span<const double> log_reference = {};
};

/// Solves `problem`, optionally starting the dual from `start` (one entry per
/// row; ignored when empty).
TiltResult solve_tilt(const TiltProblem& problem, const TiltOptions& options,
                      std::span<const double> start = {});

}  // namespace bahadur_lab::detail
