#include "bvm/bvmbounds.hpp"

#include <algorithm>
#include <cmath>

#include "bvm/gausstools.hpp"

namespace bvm {

ModelConstants make_model_constants(double nu0, double omega, double g, double b,
                                    std::function<double(double)> delta_of_r, int p_star,
                                    int p, double trace_b, double lambda_b) {
  if (!(nu0 > 0.0)) throw InvalidInput("ModelConstants: nu0 must be positive");
  if (omega < 0.0) throw InvalidInput("ModelConstants: omega must be non-negative");
  if (!(g > 0.0)) throw InvalidInput("ModelConstants: g must be positive");
  if (!(b > 0.0) || b > 1.0) throw InvalidInput("ModelConstants: b must lie in (0, 1]");
  if (p_star < 1 || p < 1 || p > p_star) {
    throw InvalidInput("ModelConstants: need 1 <= p <= p_star");
  }
  if (!(lambda_b > 0.0) || trace_b < lambda_b) {
    throw InvalidInput("ModelConstants: need trace_b >= lambda_b > 0");
  }
  if (!delta_of_r) throw InvalidInput("ModelConstants: delta_of_r must be callable");
  double prev = 0.0;
  for (double r = 1.0 / 1024.0; r <= 1024.0; r *= 2.0) {
    const double d = delta_of_r(r);
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw InvalidInput("ModelConstants: delta_of_r must be finite and non-negative");
    }
    if (d + 1e-12 < prev) throw InvalidInput("ModelConstants: delta_of_r must be nondecreasing");
    prev = d;
  }
  return ModelConstants{nu0, omega, g, b, std::move(delta_of_r), p_star, p, trace_b, lambda_b};
}

double entropy_term(int p_star, double x, double g) {
  if (p_star < 1) throw InvalidInput("entropy_term: p_star must be a positive integer");
  if (!(x > 0.0)) throw InvalidInput("entropy_term: x must be positive");
  if (!(g > 0.0)) throw InvalidInput("entropy_term: g must be positive");
  const double ps = double(p_star);
  return 2.0 * std::sqrt(ps) + std::sqrt(2.0 * x) + (x / (g * g) + 1.0) * 4.0 * ps / g;
}

double spread(const ModelConstants& constants, double r0, double x) {
  if (!(r0 > 0.0)) throw InvalidInput("spread: r0 must be positive");
  if (!(x > 0.0)) throw InvalidInput("spread: x must be positive");
  const double q = entropy_term(constants.p_star, x, constants.g);
  return (constants.delta_of_r(r0) + 6.0 * constants.nu0 * q * constants.omega) * r0 * r0;
}

double radius_solver(const ModelConstants& constants, double x, double r0) {
  if (!(x > 0.0)) throw InvalidInput("radius_solver: x must be positive");
  const double z_b = z_score_bound(constants.trace_b, constants.lambda_b, x);
  const double z_p = z_quantile(constants.p_star, x);
  // Concentration floors; the second keeps the tail_mass bound applicable.
  const double floor_sum = z_p + z_b;
  const double x_shift = x + 0.5 * double(constants.p) * std::log(std::exp(1.0) / constants.b);
  const double floor_conc = z_quantile(constants.p_star, x_shift) / std::sqrt(constants.b);
  const double r_ref = r0 > 0.0 ? r0 : floor_sum;

  auto step = [&](double r) {
    const double q = entropy_term(constants.p_star, x + std::log(2.0 * r / r_ref), constants.g);
    const double rhs = (2.0 / constants.b) * (z_b + 6.0 * constants.nu0 * q * constants.omega);
    return std::max({r_ref, floor_sum, floor_conc, rhs});
  };

  double r = std::max({r_ref, floor_sum, floor_conc});
  const double tol = 1e-8;
  for (int it = 0; it < 200; ++it) {
    const double next = 0.5 * (r + step(r));
    if (std::abs(next - r) <= tol * std::max(1.0, next)) {
      r = next;
      return std::max(r, step(r));
    }
    r = next;
  }

  // Bisection fallback on h(r) = r - step(r), which is increasing for a
  // contractive step map.
  double lo = std::max({r_ref, floor_sum, floor_conc});
  double hi = 1e6;
  if (lo - step(lo) > 0.0) return lo;
  if (hi - step(hi) < 0.0) throw NoConvergence("radius_solver: no fixed point below 1e6");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - step(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= tol * std::max(1.0, hi)) return hi;
  }
  throw NoConvergence("radius_solver: bisection failed to converge");
}

double tail_mass(double delta, double x) {
  if (delta < 0.0) throw InvalidInput("tail_mass: delta must be non-negative");
  if (!(x > 0.0)) throw InvalidInput("tail_mass: x must be positive");
  return std::exp(2.0 * delta + 2.0 * std::exp(-x) - x);
}

double tau(double delta, int p, bool sqrt_variant) {
  if (delta < 0.0) throw InvalidInput("tau: delta must be non-negative");
  if (p < 1) throw InvalidInput("tau: p must be a positive integer");
  const double s =
      double(p) * delta * delta + (1.0 + delta) * (1.0 + delta) * delta * delta;
  return sqrt_variant ? 0.5 * std::sqrt(s) : 0.5 * s;
}

std::pair<double, double> delta_plus_minus(double delta, double x) {
  if (delta < 0.0) throw InvalidInput("delta_plus_minus: delta must be non-negative");
  if (!(x > 0.0)) throw InvalidInput("delta_plus_minus: x must be positive");
  const double ex = std::exp(-x);
  const double cross = std::exp(delta + 4.0 * ex - x);
  const double plus = 2.0 * delta + 2.0 * ex + 2.0 * cross;
  const double minus = 2.0 * delta + 3.0 * ex + 4.0 * cross;
  return {plus, minus};
}

BvmBudget bvm_budget(const ModelConstants& constants, double r0, double x,
                     bool tau_sqrt_variant) {
  BvmBudget out;
  out.r0 = r0;
  out.x = x;
  out.delta = spread(constants, r0, x);
  out.tau = tau(out.delta, constants.p, tau_sqrt_variant);
  out.rho_star = tail_mass(out.delta, x);
  std::tie(out.delta_plus, out.delta_minus) = delta_plus_minus(out.delta, x);
  const double ex = std::exp(-x);
  out.mean_bound = 4.0 * out.delta + 16.0 * ex;
  out.cov_bound = out.mean_bound;
  out.tv_factor = std::exp(2.0 * out.delta + 5.0 * ex);
  return out;
}

BvmBudget sieve_budget(BvmBudget budget, double alpha_m, double beta_m) {
  if (alpha_m < 0.0 || beta_m < 0.0) {
    throw InvalidInput("sieve_budget: corrections must be non-negative");
  }
  const double base = budget.mean_bound;
  budget.mean_bound = (1.0 + beta_m) * base + alpha_m;
  budget.cov_bound = beta_m + (1.0 + beta_m) * base;
  return budget;
}

std::pair<double, double> gaussian_prior_flatness(double eps, double r0, double g_ups_norm) {
  if (eps < 0.0 || g_ups_norm < 0.0 || !(r0 > 0.0)) {
    throw InvalidInput("gaussian_prior_flatness: invalid argument");
  }
  const double alpha = std::max(eps * r0 * g_ups_norm, 0.5 * eps * eps * r0 * r0);
  const double c = std::exp(0.5 * g_ups_norm * g_ups_norm);
  return {alpha, c};
}

double iid_spread(double c, int p, long long n) {
  if (!(c > 0.0)) throw InvalidInput("iid_spread: c must be positive");
  if (p < 1 || n < 1) throw InvalidInput("iid_spread: p and n must be positive");
  const double pd = double(p);
  return c * std::sqrt(pd * pd * pd / double(n));
}

}  // namespace bvm
