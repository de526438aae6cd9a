#include "bvm/gausstools.hpp"

#include <algorithm>
#include <cmath>

namespace bvm {

double z_quantile(int p, double x) {
  if (p < 1) throw InvalidInput("z_quantile: p must be a positive integer");
  if (!(x > 0.0)) throw InvalidInput("z_quantile: x must be positive");
  const double pd = double(p);
  return std::sqrt(pd + std::max(std::sqrt(6.6 * pd * x), 6.6 * x));
}

double z_lower(int p, double x) {
  if (p < 1) throw InvalidInput("z_lower: p must be a positive integer");
  if (!(x > 0.0)) throw InvalidInput("z_lower: x must be positive");
  const double rad = double(p) - 2.0 * std::sqrt(double(p) * x);
  if (!(rad > 0.0)) throw InvalidInput("z_lower: bound degenerate, p - 2 sqrt(px) <= 0");
  return std::sqrt(rad);
}

double z_score_bound(double trace_b, double lambda_b, double x) {
  if (!(lambda_b > 0.0) || trace_b < lambda_b) {
    throw InvalidInput("z_score_bound: need trace_b >= lambda_b > 0");
  }
  if (!(x > 0.0)) throw InvalidInput("z_score_bound: x must be positive");
  return std::sqrt(trace_b + 6.0 * lambda_b * x);
}

double gauss_shifted_tail(int p, double u_norm, double z) {
  return std::exp(-0.25 * z * z + 0.5 * double(p) + 0.5 * u_norm * u_norm);
}

double kl_gaussians(const Eigen::MatrixXd& u_matrix, const Eigen::VectorXd& beta) {
  const Eigen::Index p = u_matrix.rows();
  if (u_matrix.cols() != p) throw DimensionMismatch("kl_gaussians: U must be square");
  if (beta.size() != p) throw DimensionMismatch("kl_gaussians: beta size must match U");

  Eigen::MatrixXd gram = u_matrix.transpose() * u_matrix;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("kl_gaussians: U^T U is singular to working precision");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = l(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularMatrix("kl_gaussians: U^T U is singular to working precision");
    }
    log_det += 2.0 * std::log(d);
  }
  const double two_kl =
      -log_det + gram.trace() - double(p) + beta.dot(gram * beta);
  return std::max(0.0, 0.5 * two_kl);
}

double tv_pinsker(double kl) {
  if (kl < 0.0) throw InvalidInput("tv_pinsker: kl must be non-negative");
  return std::min(1.0, std::sqrt(0.5 * kl));
}

double rescale_tv_penalty(double alpha, double beta, int p) {
  if (alpha < 0.0 || beta < 0.0) throw InvalidInput("rescale_tv_penalty: negative argument");
  const double s = alpha * alpha * double(p) + (1.0 + alpha) * (1.0 + alpha) * beta * beta;
  return 0.5 * std::sqrt(s);
}

}  // namespace bvm
