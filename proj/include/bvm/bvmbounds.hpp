#pragma once

#include <functional>
#include <utility>

#include "bvm/errors.hpp"

namespace bvm {

// Condition constants describing one model instance. delta_of_r is the local
// quadratic-approximation defect delta(r); for the regression families it is
// linear in r with a model-specific coefficient.
struct ModelConstants {
  double nu0 = 1.0;     // score exponential-moment constant
  double omega = 0.0;   // stochastic-modulus scale; zero for exact quadratic score
  double g = 1.0;       // exponential-moment range
  double b = 1.0;       // global identifiability constant, in (0, 1]
  std::function<double(double)> delta_of_r;
  int p_star = 1;       // full dimension
  int p = 1;            // target dimension
  double trace_b = 1.0;  // tr(B) of the standardized score variance
  double lambda_b = 1.0; // largest eigenvalue of B
};

// Validates invariants (positivity, b in (0,1], delta nonnegative and
// nondecreasing on a probe grid). Throws InvalidInput.
ModelConstants make_model_constants(double nu0, double omega, double g, double b,
                                    std::function<double(double)> delta_of_r, int p_star,
                                    int p, double trace_b, double lambda_b);

// Composed non-asymptotic error budget for the posterior-vs-Gaussian
// comparison at radius r0 and confidence level e^{-x}.
struct BvmBudget {
  double r0 = 0.0;
  double x = 0.0;
  double delta = 0.0;        // spread(r0, x)
  double tau = 0.0;
  double rho_star = 0.0;     // posterior mass outside the local set
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  double mean_bound = 0.0;   // 4 delta + 16 e^{-x}
  double cov_bound = 0.0;    // 4 delta + 16 e^{-x}
  double tv_factor = 0.0;    // exp(2 delta + 5 e^{-x})
};

// Entropy-type term q(x) = 2 sqrt(p*) + sqrt(2x) + g^{-1} (g^{-2} x + 1) 4 p*.
double entropy_term(int p_star, double x, double g);

// Local approximation quality delta(r0, x) = {delta(r0) + 6 nu0 q(x) omega} r0^2.
double spread(const ModelConstants& constants, double r0, double x);

// Smallest admissible local radius: the fixed point of
//   r = (2/b) {z(B,x) + 6 nu0 q(x + log(2r/r0)) omega}
// intersected with the concentration floors
//   r >= z(p*,x) + z(B,x)   and   b r^2 >= z^2(p*, x + (p/2) log(e/b)).
// r0 < 0 selects the first floor as the starting radius. Throws NoConvergence
// if neither damped iteration nor bisection settles within the budget.
double radius_solver(const ModelConstants& constants, double x, double r0 = -1.0);

// Posterior mass outside the checked ball: rho* <= exp{2 delta + 2 e^{-x} - x}.
double tail_mass(double delta, double x);

// Rescaling defect tau = (p delta^2 + (1+delta)^2 delta^2) / 2; the
// sqrt variant returns half the square root of the same expression.
double tau(double delta, int p, bool sqrt_variant = false);

// Localized-expectation composites (upper bounds on Delta+ and Delta-).
std::pair<double, double> delta_plus_minus(double delta, double x);

// Fills every budget field from the printed formulas.
BvmBudget bvm_budget(const ModelConstants& constants, double r0, double x,
                     bool tau_sqrt_variant = false);

// Semiparametric sieve corrections: mean bound (1+beta_m) Delta* + alpha_m,
// covariance bound beta_m + (1+beta_m) Delta*, with Delta* the base bound.
BvmBudget sieve_budget(BvmBudget budget, double alpha_m, double beta_m);

// Gaussian-prior flatness pair: alpha(r0) = max{eps r0 |G ups*|, eps^2 r0^2 / 2}
// and C(r0) <= exp(|G ups*|^2 / 2).
std::pair<double, double> gaussian_prior_flatness(double eps, double r0, double g_ups_norm);

// Product-model spread C sqrt(p^3 / n).
double iid_spread(double c, int p, long long n);

}  // namespace bvm
