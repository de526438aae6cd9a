#pragma once

#include <json.hpp>

#include "bvm/bvmbounds.hpp"

namespace bvm {

// Declarative description of one budget evaluation, as read from bounds.json.
// Either r0 is given explicitly or solve_r0 requests radius_solver.
struct BoundsConfig {
  double nu0 = 0.0;
  double omega = 0.0;
  double g = 0.0;
  double b = 0.0;
  int p = 0;
  int p_star = 0;
  double x = 0.0;
  double r0 = -1.0;
  bool solve_r0 = false;
  double delta_coeff = 0.0;  // delta(r) = delta_coeff * r
  double trace_b = 0.0;
  double lambda_b = 0.0;
  bool has_sieve = false;
  double alpha_m = 0.0;
  double beta_m = 0.0;
};

// Parses and validates the schema; throws ConfigError naming the field.
BoundsConfig parse_bounds_config(const nlohmann::json& doc);

// Builds the constants, resolves the radius, composes the budget and applies
// the sieve corrections when present.
BvmBudget evaluate_bounds_config(const BoundsConfig& config);

nlohmann::json budget_to_json(const BvmBudget& budget);

}  // namespace bvm
