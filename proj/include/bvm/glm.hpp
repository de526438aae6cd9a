#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "bvm/errors.hpp"

namespace bvm {

// Canonical exponential families selected by their cumulant d(w):
//   gaussian     d(w) = w^2 / 2
//   logistic     d(w) = log(e^w + 1)
//   poisson      d(w) = e^w           (argument clamped at 700)
//   exponential  d(w) = -log(-w)      (defined for w < 0 only)
enum class GlmFamily { gaussian, logistic, poisson, exponential };

GlmFamily glm_family_from_string(const std::string& name);
std::string to_string(GlmFamily family);

// Cumulant and derivatives. For the exponential family at w >= 0 the
// cumulant is +inf (density not normalizable); the derivatives throw
// InvalidInput there.
double glm_cumulant(GlmFamily family, double w);
double glm_cumulant_d1(GlmFamily family, double w);
double glm_cumulant_d2(GlmFamily family, double w);

struct GlmModel {
  Eigen::MatrixXd design;        // n x p*, full column rank
  GlmFamily family = GlmFamily::gaussian;
  Eigen::VectorXd responses;     // Y
  Eigen::VectorXd noise_scales;  // s_i, positive
  double lipschitz_d2 = 0.0;     // Lipschitz constant of d''
};

// Validates dimensions, rank, and positivity of the noise scales.
GlmModel make_glm_model(const Eigen::MatrixXd& design, GlmFamily family,
                        const Eigen::VectorXd& responses, const Eigen::VectorXd& noise_scales,
                        double lipschitz_d2);

// L(ups) = sum_i { Y_i Psi_i^T ups - d(Psi_i^T ups) }. Returns -inf where
// the family is undefined (exponential with some Psi_i^T ups >= 0).
double glm_loglik(const Eigen::VectorXd& upsilon, const GlmModel& model);
Eigen::VectorXd glm_grad(const Eigen::VectorXd& upsilon, const GlmModel& model);
Eigen::MatrixXd glm_hessian(const Eigen::VectorXd& upsilon, const GlmModel& model);

// Newton iteration with step-halving; converged when
// |grad| <= tol (1 + |Y|). init of size zero selects the default start.
Eigen::VectorXd glm_mle(const GlmModel& model, double tol = 1e-10, int max_iter = 100,
                        Eigen::VectorXd init = Eigen::VectorXd());

// D0^2 = sum_i d''(Psi_i^T ups*) Psi_i Psi_i^T.
Eigen::MatrixXd glm_fisher(const Eigen::VectorXd& upsilon_star, const GlmModel& model);

// V0^2 = sum_i s_i^2 Psi_i Psi_i^T; equals D0^2 when s_i^2 = d''(Psi_i^T ups*).
Eigen::MatrixXd glm_vmatrix(const GlmModel& model);

// -E L(ups, ups*) = sum_i { d(w_i) - d(w_i*) - d'(w_i*)(w_i - w_i*) } >= 0,
// the Kullback-Leibler divergence between the two parameter values.
double glm_excess(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& upsilon_star,
                  const GlmModel& model);

// Quadratic-approximation defect bound delta(r) = L r / sqrt(N2), with
// 1/sqrt(N2) = max_i |D0^{-1} Psi_i| / d''(Psi_i^T ups*).
double glm_delta_r(double r, const GlmModel& model, const Eigen::VectorXd& upsilon_star,
                   const Eigen::MatrixXd& fisher);

// One response vector drawn at ups*.
Eigen::VectorXd sample_glm_responses(const Eigen::MatrixXd& design, GlmFamily family,
                                     const Eigen::VectorXd& upsilon_star, std::mt19937_64& rng);

}  // namespace bvm
