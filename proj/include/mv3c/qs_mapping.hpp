#pragma once

#include <optional>
#include <vector>

#include "mv3c/freq_analysis.hpp"

namespace mv3c {

// Parameters of the reciprocal mapping Q = a / (delta + b), clamped to
// [q_min, q_max]. b may be negative; the only hard requirement is
// delta + b > 0 wherever the mapping is applied.
struct MappingParams {
  double a = 0.0;
  double b = 0.0;
  double q_min = 1.0;
  double q_max = 16.0;
};

// Solves (a, b) from the corner anchors (q_min, delta_max), (q_max, delta_min)
// so the most spread-out subband gets the finest step and vice versa.
// Requires delta_max > delta_min >= 0 and q_max > q_min >= 1; a spread below
// the degeneracy threshold raises a usage error (callers fall back to a
// uniform plan).
MappingParams solve_params(double delta_min, double delta_max, double q_min, double q_max);

double degenerate_spread_threshold(double delta_max);

double map_qs(double delta, const MappingParams& p);

// Per-subband quantization steps aligned with decomposition order. params is
// empty for uniform plans. gamma records the cumulative rate-targeting scale.
struct QuantizationPlan {
  std::vector<double> steps;
  std::optional<MappingParams> params;
  double gamma = 1.0;

  bool is_uniform() const { return !params.has_value(); }
};

QuantizationPlan uniform_plan(std::size_t bands, double qs);

// delta range is taken over all subbands; on degenerate spread the plan falls
// back to uniform at q_min.
QuantizationPlan build_plan(const std::vector<SubbandStats>& stats, double q_min, double q_max);

// Elementwise QS' = max(1, gamma * QS); relative subband ordering survives.
QuantizationPlan scale_plan(const QuantizationPlan& plan, double gamma);

}  // namespace mv3c
