#include "bvm/bounds_config.hpp"

#include <set>
#include <string>

namespace bvm {

namespace {

double require_number(const nlohmann::json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError(key, "missing required field");
  if (!doc[key].is_number()) throw ConfigError(key, "must be a number");
  return doc[key].get<double>();
}

int require_int(const nlohmann::json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError(key, "missing required field");
  if (!doc[key].is_number_integer()) throw ConfigError(key, "must be an integer");
  return doc[key].get<int>();
}

}  // namespace

BoundsConfig parse_bounds_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("(root)", "config must be a JSON object");
  static const std::set<std::string> known = {
      "nu0",   "omega",       "g",       "b",        "p",      "p_star", "x",
      "r0",    "solve_r0",    "delta_coeff", "trace_B", "lambda_B", "alpha_m", "beta_m"};
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw ConfigError(item.key(), "unknown field");
  }

  BoundsConfig cfg;
  cfg.nu0 = require_number(doc, "nu0");
  cfg.omega = require_number(doc, "omega");
  cfg.g = require_number(doc, "g");
  cfg.b = require_number(doc, "b");
  cfg.p = require_int(doc, "p");
  cfg.p_star = require_int(doc, "p_star");
  cfg.x = require_number(doc, "x");
  cfg.delta_coeff = require_number(doc, "delta_coeff");
  cfg.trace_b = require_number(doc, "trace_B");
  cfg.lambda_b = require_number(doc, "lambda_B");

  const bool has_r0 = doc.contains("r0");
  cfg.solve_r0 = doc.contains("solve_r0") && doc["solve_r0"].is_boolean() &&
                 doc["solve_r0"].get<bool>();
  if (doc.contains("solve_r0") && !doc["solve_r0"].is_boolean()) {
    throw ConfigError("solve_r0", "must be a boolean");
  }
  if (has_r0 == cfg.solve_r0) {
    throw ConfigError("r0", "provide exactly one of r0 or solve_r0:true");
  }
  if (has_r0) {
    cfg.r0 = require_number(doc, "r0");
    if (!(cfg.r0 > 0.0)) throw ConfigError("r0", "must be positive");
  }

  cfg.has_sieve = doc.contains("alpha_m") || doc.contains("beta_m");
  if (doc.contains("alpha_m")) cfg.alpha_m = require_number(doc, "alpha_m");
  if (doc.contains("beta_m")) cfg.beta_m = require_number(doc, "beta_m");
  return cfg;
}

BvmBudget evaluate_bounds_config(const BoundsConfig& config) {
  const double coeff = config.delta_coeff;
  ModelConstants constants;
  try {
    constants = make_model_constants(
        config.nu0, config.omega, config.g, config.b,
        [coeff](double r) { return coeff * r; }, config.p_star, config.p, config.trace_b,
        config.lambda_b);
  } catch (const InvalidInput& err) {
    throw ConfigError("(constants)", err.what());
  }
  const double r0 =
      config.solve_r0 ? radius_solver(constants, config.x) : config.r0;
  BvmBudget budget = bvm_budget(constants, r0, config.x);
  if (config.has_sieve) budget = sieve_budget(budget, config.alpha_m, config.beta_m);
  return budget;
}

nlohmann::json budget_to_json(const BvmBudget& budget) {
  return nlohmann::json{
      {"r0", budget.r0},
      {"x", budget.x},
      {"delta", budget.delta},
      {"tau", budget.tau},
      {"rho_star", budget.rho_star},
      {"delta_plus", budget.delta_plus},
      {"delta_minus", budget.delta_minus},
      {"mean_bound", budget.mean_bound},
      {"cov_bound", budget.cov_bound},
      {"tv_factor", budget.tv_factor},
  };
}

}  // namespace bvm
