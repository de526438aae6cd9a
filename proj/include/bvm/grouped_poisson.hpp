#pragma once

#include <Eigen/Dense>
#include <limits>
#include <random>
#include <utility>

#include "bvm/blockinfo.hpp"
#include "bvm/errors.hpp"

namespace bvm {

// Poisson observations in p_n groups of m_n consecutive draws. The canonical
// group parameter is u_j = log ups_j; the target is the average of the u_j.
// The common true value defaults to u* = log(1/p_n), and the prior on each
// ups_j is exponential with scale prior_scale.
struct GroupedPoissonModel {
  int p_n = 2;
  long long m_n = 1;
  double u_star = 0.0;
  double prior_scale = 1.0;

  long long n() const { return static_cast<long long>(p_n) * m_n; }
};

// Validates p_n >= 2, m_n >= 1 and the prior-flatness constraint
// prior_scale <= prior_limit_c * sqrt(n / log n). Pass u_star = NaN for the
// default log(1/p_n).
GroupedPoissonModel make_grouped_poisson(int p_n, long long m_n, double prior_scale = 1.0,
                                         double u_star =
                                             std::numeric_limits<double>::quiet_NaN(),
                                         double prior_limit_c = 1.0);

// Z_j = sum of the j-th block of m_n consecutive counts.
Eigen::VectorXd poisson_group_sums(const Eigen::VectorXd& y, const GroupedPoissonModel& model);

// L(u) = sum_j { Z_j u_j - m_n exp(u_j) }.
double poisson_loglik(const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                      const GroupedPoissonModel& model);

// Gradient of poisson_loglik in u.
Eigen::VectorXd poisson_loglik_grad(const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                                    const GroupedPoissonModel& model);

// Profile MLE of the target: (1/p_n) sum_j log(Z_j / m_n).
// Throws ZeroCount when some Z_j = 0.
double poisson_profile_mle(const Eigen::VectorXd& z, const GroupedPoissonModel& model);

// Conjugate posterior of ups_j given Z: Gamma with shape alpha_j = 1 + Z_j
// and common scale mu / (m_n mu + 1).
std::pair<Eigen::VectorXd, double> poisson_posterior_params(const Eigen::VectorXd& z,
                                                            const GroupedPoissonModel& model);

// Fisher information at u* in (theta, ubar_2 .. ubar_p) coordinates:
// m_n e^{u*} [[p^2, -p 1^T], [-p 1, I + 1 1^T]]. Its Schur complement is
// m_n p_n e^{u*}, which is exactly m_n at the default u*.
FullInfo poisson_full_fisher(const GroupedPoissonModel& model);

// One draw of the group sums, Z_j ~ Poisson(m_n e^{u*}) independently.
Eigen::VectorXd sample_poisson_group_sums(const GroupedPoissonModel& model,
                                          std::mt19937_64& rng);

}  // namespace bvm
