#pragma once

#include <Eigen/Dense>

#include "bvm/errors.hpp"

namespace bvm {

// Closed-form Gaussian inequalities: norm quantiles, shifted tails, and
// divergence between two normal laws. Bounds are returned un-clamped except
// tv_pinsker, so callers can compose them.

// Upper quantile of the norm of a standard Gaussian p-vector:
// z(p,x) = sqrt(p + max(sqrt(6.6 p x), 6.6 x)), so P(|gamma| >= z) <= e^{-x}.
double z_quantile(int p, double x);

// Lower companion z1(p,x) = sqrt(p - 2 sqrt(px)); throws InvalidInput when
// the radicand is not positive (bound degenerate).
double z_lower(int p, double x);

// Norm quantile for gamma with general covariance B described by its trace
// and largest eigenvalue: z(B,x) = sqrt(tr B + 6 lambda_max(B) x).
double z_score_bound(double trace_b, double lambda_b, double x);

// Tail bound P(|gamma - u| >= z) <= exp(-z^2/4 + p/2 + |u|^2/2) for a
// standard Gaussian p-vector. May exceed one; callers clamp as needed.
double gauss_shifted_tail(int p, double u_norm, double z);

// KL(N(0,I), N(beta, (U^T U)^{-1})) =
//   (-log det(U^T U) + tr(U^T U - I) + beta^T U^T U beta) / 2.
double kl_gaussians(const Eigen::MatrixXd& u_matrix, const Eigen::VectorXd& beta);

// Pinsker: total variation <= min(1, sqrt(kl/2)).
double tv_pinsker(double kl);

// Additive total-variation penalty for re-centering and re-scaling a
// Gaussian approximation: (1/2) sqrt(alpha^2 p + (1+alpha)^2 beta^2).
double rescale_tv_penalty(double alpha, double beta, int p);

}  // namespace bvm
