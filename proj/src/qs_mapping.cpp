#include "mv3c/qs_mapping.hpp"

#include <algorithm>
#include <cmath>

namespace mv3c {

double degenerate_spread_threshold(double delta_max) {
  return 1e-6 * std::max(1.0, delta_max);
}

MappingParams solve_params(double delta_min, double delta_max, double q_min, double q_max) {
  if (!(delta_min >= 0.0)) fail(ErrorKind::usage, "solve_params: delta_min must be >= 0");
  if (!(q_min >= 1.0)) fail(ErrorKind::usage, "solve_params: q_min must be >= 1");
  if (!(q_max > q_min)) fail(ErrorKind::usage, "solve_params: q_max must exceed q_min");
  if (!(delta_max - delta_min > degenerate_spread_threshold(delta_max)))
    fail(ErrorKind::usage, "solve_params: degenerate delta spread");

  MappingParams p;
  p.q_min = q_min;
  p.q_max = q_max;
  p.a = q_min * q_max * (delta_max - delta_min) / (q_max - q_min);
  p.b = (q_min * delta_max - q_max * delta_min) / (q_max - q_min);
  return p;
}

double map_qs(double delta, const MappingParams& p) {
  double denom = delta + p.b;
  if (!(denom > 0.0)) fail(ErrorKind::usage, "map_qs: delta + b must be positive");
  return std::clamp(p.a / denom, p.q_min, p.q_max);
}

QuantizationPlan uniform_plan(std::size_t bands, double qs) {
  if (bands == 0) fail(ErrorKind::usage, "uniform_plan: no subbands");
  if (!(qs >= 1.0)) fail(ErrorKind::usage, "uniform_plan: qs must be >= 1");
  QuantizationPlan plan;
  plan.steps.assign(bands, qs);
  return plan;
}

QuantizationPlan build_plan(const std::vector<SubbandStats>& stats, double q_min, double q_max) {
  if (stats.empty()) fail(ErrorKind::usage, "build_plan: no subband stats");
  double dmin = stats[0].delta, dmax = stats[0].delta;
  for (const auto& s : stats) {
    dmin = std::min(dmin, s.delta);
    dmax = std::max(dmax, s.delta);
  }
  if (stats.size() == 1 || dmax - dmin <= degenerate_spread_threshold(dmax))
    return uniform_plan(stats.size(), q_min);

  QuantizationPlan plan;
  plan.params = solve_params(dmin, dmax, q_min, q_max);
  plan.steps.reserve(stats.size());
  for (const auto& s : stats) plan.steps.push_back(map_qs(s.delta, *plan.params));
  return plan;
}

QuantizationPlan scale_plan(const QuantizationPlan& plan, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::usage, "scale_plan: gamma must be positive");
  QuantizationPlan out = plan;
  out.gamma = plan.gamma * gamma;
  for (double& qs : out.steps) qs = std::max(1.0, gamma * qs);
  return out;
}

}  // namespace mv3c
