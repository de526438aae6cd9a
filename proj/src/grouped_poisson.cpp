#include "bvm/grouped_poisson.hpp"

#include <cmath>

namespace bvm {

GroupedPoissonModel make_grouped_poisson(int p_n, long long m_n, double prior_scale,
                                         double u_star, double prior_limit_c) {
  if (p_n < 2) throw InvalidInput("GroupedPoissonModel: p_n must be at least 2");
  if (m_n < 1) throw InvalidInput("GroupedPoissonModel: m_n must be at least 1");
  if (!(prior_scale > 0.0)) throw InvalidInput("GroupedPoissonModel: prior_scale must be positive");
  const double n = double(p_n) * double(m_n);
  const double limit = prior_limit_c * std::sqrt(n / std::log(std::max(n, 3.0)));
  if (prior_scale > limit) {
    throw InvalidInput("GroupedPoissonModel: prior_scale exceeds the flatness limit");
  }
  if (std::isnan(u_star)) u_star = std::log(1.0 / double(p_n));
  return GroupedPoissonModel{p_n, m_n, u_star, prior_scale};
}

Eigen::VectorXd poisson_group_sums(const Eigen::VectorXd& y, const GroupedPoissonModel& model) {
  if (y.size() != model.n()) {
    throw DimensionMismatch("poisson_group_sums: y must have length p_n * m_n");
  }
  Eigen::VectorXd z(model.p_n);
  for (int j = 0; j < model.p_n; ++j) {
    z(j) = y.segment(static_cast<Eigen::Index>(j) * model.m_n, model.m_n).sum();
  }
  return z;
}

double poisson_loglik(const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                      const GroupedPoissonModel& model) {
  if (u.size() != model.p_n || z.size() != model.p_n) {
    throw DimensionMismatch("poisson_loglik: u and z must have length p_n");
  }
  return (z.array() * u.array() - double(model.m_n) * u.array().exp()).sum();
}

Eigen::VectorXd poisson_loglik_grad(const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                                    const GroupedPoissonModel& model) {
  if (u.size() != model.p_n || z.size() != model.p_n) {
    throw DimensionMismatch("poisson_loglik_grad: u and z must have length p_n");
  }
  return z.array() - double(model.m_n) * u.array().exp();
}

double poisson_profile_mle(const Eigen::VectorXd& z, const GroupedPoissonModel& model) {
  if (z.size() != model.p_n) throw DimensionMismatch("poisson_profile_mle: z must have length p_n");
  double acc = 0.0;
  for (int j = 0; j < model.p_n; ++j) {
    if (!(z(j) > 0.0)) {
      throw ZeroCount("poisson_profile_mle: group " + std::to_string(j) + " has zero count");
    }
    acc += std::log(z(j) / double(model.m_n));
  }
  return acc / double(model.p_n);
}

std::pair<Eigen::VectorXd, double> poisson_posterior_params(const Eigen::VectorXd& z,
                                                            const GroupedPoissonModel& model) {
  if (z.size() != model.p_n) {
    throw DimensionMismatch("poisson_posterior_params: z must have length p_n");
  }
  Eigen::VectorXd alpha = z.array() + 1.0;
  const double mu = model.prior_scale;
  const double scale = mu / (double(model.m_n) * mu + 1.0);
  return {alpha, scale};
}

FullInfo poisson_full_fisher(const GroupedPoissonModel& model) {
  const double scale = double(model.m_n) * std::exp(model.u_star);
  const int p = model.p_n;
  const int q = p - 1;
  Eigen::MatrixXd target(1, 1);
  target << scale * double(p) * double(p);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Constant(1, q, -scale * double(p));
  Eigen::MatrixXd nuisance =
      scale * (Eigen::MatrixXd::Identity(q, q) + Eigen::MatrixXd::Ones(q, q));
  return make_full_info(target, cross, nuisance);
}

Eigen::VectorXd sample_poisson_group_sums(const GroupedPoissonModel& model,
                                          std::mt19937_64& rng) {
  const double mean = double(model.m_n) * std::exp(model.u_star);
  std::poisson_distribution<long long> pois(mean);
  Eigen::VectorXd z(model.p_n);
  for (int j = 0; j < model.p_n; ++j) z(j) = double(pois(rng));
  return z;
}

}  // namespace bvm
