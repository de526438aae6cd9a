#include "bvm/linear_model.hpp"

#include <cmath>

#include "bvm/blockinfo.hpp"

namespace bvm {

LinearModel make_linear_model(const Eigen::MatrixXd& design, std::function<double(double)> h,
                              std::function<double(double)> h1, std::function<double(double)> h2,
                              double h_bar, double lipschitz_h2,
                              const Eigen::VectorXd& noise_scales) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n < 1 || p < 1) throw DimensionMismatch("LinearModel: empty design");
  if (!h || !h1 || !h2) throw InvalidInput("LinearModel: h, h1, h2 must all be set");
  if (!(h_bar > 0.0)) throw InvalidInput("LinearModel: h_bar must be positive");
  if (lipschitz_h2 < 0.0) throw InvalidInput("LinearModel: lipschitz_h2 must be non-negative");
  if (noise_scales.size() != n) {
    throw DimensionMismatch("LinearModel: noise_scales must have n entries");
  }
  if ((noise_scales.array() <= 0.0).any()) {
    throw InvalidInput("LinearModel: noise_scales must be positive");
  }
  if (!full_column_rank(design)) throw RankDeficient("LinearModel: design is rank deficient");
  return LinearModel{design, std::move(h), std::move(h1), std::move(h2),
                     h_bar,  lipschitz_h2, noise_scales};
}

double linear_loglik(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                     const LinearModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("linear_loglik: upsilon size must match the design");
  }
  if (responses.size() != model.design.rows()) {
    throw DimensionMismatch("linear_loglik: responses must have n entries");
  }
  const Eigen::VectorXd resid = responses - model.design * upsilon;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < resid.size(); ++i) acc += model.h(resid(i));
  return acc;
}

Eigen::VectorXd linear_grad(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                            const LinearModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("linear_grad: upsilon size must match the design");
  }
  if (responses.size() != model.design.rows()) {
    throw DimensionMismatch("linear_grad: responses must have n entries");
  }
  const Eigen::VectorXd resid = responses - model.design * upsilon;
  Eigen::VectorXd weights(resid.size());
  for (Eigen::Index i = 0; i < resid.size(); ++i) weights(i) = model.h1(resid(i));
  return -(model.design.transpose() * weights);
}

Eigen::MatrixXd linear_hessian(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                               const LinearModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("linear_hessian: upsilon size must match the design");
  }
  if (responses.size() != model.design.rows()) {
    throw DimensionMismatch("linear_hessian: responses must have n entries");
  }
  const Eigen::VectorXd resid = responses - model.design * upsilon;
  Eigen::VectorXd weights(resid.size());
  for (Eigen::Index i = 0; i < resid.size(); ++i) weights(i) = model.h2(resid(i));
  return model.design.transpose() * weights.asDiagonal() * model.design;
}

Eigen::MatrixXd linear_fisher(const LinearModel& model) {
  return model.h_bar * (model.design.transpose() * model.design);
}

namespace {

// max over rows of s_i |D0^{-1} Psi_i|; unit scales give the N1 variant.
double max_whitened_row(const LinearModel& model, const Eigen::MatrixXd& fisher,
                        bool use_scales) {
  Eigen::LLT<Eigen::MatrixXd> llt(fisher);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("linear model: fisher not SPD");
  double best = 0.0;
  for (Eigen::Index i = 0; i < model.design.rows(); ++i) {
    const Eigen::VectorXd psi = model.design.row(i).transpose();
    const double whitened = std::sqrt(psi.dot(llt.solve(psi)));
    best = std::max(best, use_scales ? model.noise_scales(i) * whitened : whitened);
  }
  return best;
}

}  // namespace

double linear_delta_r(double r, const LinearModel& model, const Eigen::MatrixXd& fisher) {
  if (!(r >= 0.0)) throw InvalidInput("linear_delta_r: r must be non-negative");
  return model.lipschitz_h2 * r * max_whitened_row(model, fisher, false) / model.h_bar;
}

double linear_omega(const LinearModel& model) {
  const double inv_sqrt_n2 = max_whitened_row(model, linear_fisher(model), true);
  return std::sqrt(double(model.design.rows())) * inv_sqrt_n2 * inv_sqrt_n2;
}

}  // namespace bvm
