#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "bvm/blockinfo.hpp"
#include "bvm/bvmbounds.hpp"
#include "bvm/errors.hpp"
#include "bvm/glm.hpp"
#include "bvm/grouped_poisson.hpp"

namespace bvm {

// Posterior moments of the sampled (or integrated) coordinates, together
// with the retained draws when the producing routine keeps them, one row per
// draw. Deterministic summaries (quadrature) carry no draws.
struct PosteriorSummary {
  Eigen::VectorXd mean;                 // posterior mean
  Eigen::MatrixXd cov;                  // posterior covariance, (n-1) divisor
  Eigen::MatrixXd draws;                // retained draws, draw_count x dim
  long long draw_count = 0;
  long long effective_sample_hint = 0;  // crude ESS; 0 for deterministic summaries
  double acceptance_rate = 1.0;         // Metropolis chains only; 1 elsewhere
};

// Moments of a draw matrix, one row per draw. Covariance uses the (n-1)
// divisor and is zero for a single draw.
PosteriorSummary summarize_draws(const Eigen::MatrixXd& draws, bool keep_draws = true);

// Restriction of a summary to its first p coordinates (the target block).
PosteriorSummary target_block(const PosteriorSummary& summary, Eigen::Index p);

// Prior on the full coordinate vector: either flat or centered Gaussian with
// the given precision matrix G^2, log pi(ups) = -ups^T G^2 ups / 2 + const.
struct PriorSpec {
  bool gaussian = false;
  Eigen::MatrixXd precision;
};

PriorSpec flat_prior();
PriorSpec gaussian_prior(const Eigen::MatrixXd& precision);

// First-order approximation of the profile MLE around theta*:
// theta-circ = theta* + D-breve^{-1} xi-breve.
Eigen::VectorXd theta_circ(const Eigen::VectorXd& theta_star, const EfficientInfo& eff,
                           const Eigen::VectorXd& xi_breve);

// Conjugate Gamma draws of ups given the group sums z, reduced to draws of
// the target theta(ups) = (1/p_n) sum_j log ups_j. Deterministic per seed.
PosteriorSummary sample_posterior_conjugate(const GroupedPoissonModel& model,
                                            const Eigen::VectorXd& z, long long n_draws,
                                            std::uint64_t rng_seed);

// The raw Gamma draws behind sample_posterior_conjugate, one row per draw;
// the theta draws are the row means of the elementwise log of this matrix.
Eigen::MatrixXd sample_posterior_upsilon(const GroupedPoissonModel& model,
                                         const Eigen::VectorXd& z, long long n_draws,
                                         std::uint64_t rng_seed);

// Tensor-product trapezoid quadrature of the normalized posterior over the
// box center +- halfwidths, at most three dimensions, points_per_dim >= 31.
// The box must capture essentially all mass: every boundary node must have
// density below 1e-8 of the maximal node, else BoxTooSmall.
//
// Grouped Poisson: integrates over ups on the positive orthant, posterior
// density prod_j ups_j^{Z_j} exp{-(m_n + 1/mu) ups_j}; y holds the n raw
// counts. GLM: integrates exp{L(ups)} pi(ups) over the coefficient vector.
PosteriorSummary posterior_grid_oracle(const GroupedPoissonModel& model,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& box_center,
                                       const Eigen::VectorXd& box_halfwidths,
                                       int points_per_dim);
PosteriorSummary posterior_grid_oracle(const GlmModel& model, const Eigen::VectorXd& box_center,
                                       const Eigen::VectorXd& box_halfwidths, int points_per_dim,
                                       const PriorSpec& prior = PriorSpec());

// Random-walk Metropolis over the GLM coefficient vector with proposal
// covariance proposal_scale^2 D0^{-2}, D0^2 the Fisher matrix at the chain
// start (the MLE unless init is supplied). Defaults: proposal_scale <= 0
// selects 2.4/sqrt(p*), burn_in < 0 selects min(10 p* 1000, 1e5).
// Deterministic per seed. Throws NonFiniteDensity when the starting point
// has no posterior density.
PosteriorSummary sample_posterior_rw(const GlmModel& model, const PriorSpec& prior,
                                     long long n_draws, long long burn_in = -1,
                                     long long thin = 1, double proposal_scale = 0.0,
                                     std::uint64_t rng_seed = 0,
                                     Eigen::VectorXd init = Eigen::VectorXd());

// Posterior-vs-Gaussian comparison of a target summary against the Gaussian
// limit N(theta-circ, D-breve^{-2}), with each empirical discrepancy set
// against its budget counterpart.
struct BvmDiagnostic {
  Eigen::VectorXd theta_circ;  // center of the Gaussian limit
  double mean_err = 0.0;       // |D-breve (mean - theta-circ)|^2
  double cov_err = 0.0;        // |I - D-breve S^2 D-breve|, operator norm
  double tv_est = 0.0;         // Pinsker bound for the moment-matched pair
  double tv_budget = 0.0;      // TV implied by the sandwich factors, in [0,1]
  BvmBudget budget;
  bool mean_ok = false;
  bool cov_ok = false;
  bool tv_ok = false;
};

// Fills the diagnostic. tv_est composes kl_gaussians with tv_pinsker for
// N(0, I) against the standardized posterior moments; the TV budget is the
// larger one-sided deviation implied by the sandwich factor exp(2 delta +
// 5 e^{-x}) and its lower companion exp(-2 delta - 8 e^{-x}) - e^{-x}.
BvmDiagnostic diagnose(const PosteriorSummary& summary, const Eigen::VectorXd& theta_circ,
                       const EfficientInfo& eff, const BvmBudget& budget);

// t = sqrt(m_n) (theta_draw - profile_mle) for a scalar-target summary.
Eigen::VectorXd standardized_target_draws(const PosteriorSummary& summary, double profile_mle,
                                          long long m_n);

// Histogram estimate of the total variation distance between a scalar draw
// sample and N(mu, sigma2): half the L1 gap over n_bins equal bins spanning
// the draws, plus half the Gaussian mass outside their range.
double empirical_tv_1d(const Eigen::VectorXd& draws, double mu, double sigma2,
                       int n_bins = 200);

}  // namespace bvm
