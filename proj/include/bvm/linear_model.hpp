#pragma once

#include <Eigen/Dense>
#include <functional>

#include "bvm/errors.hpp"

namespace bvm {

// Regression Y_i = Psi_i^T ups* + eps_i with i.i.d. errors from a density
// f = e^h. The model stores h and its two derivatives plus the averaged
// curvature h_bar = integral of h'' against f, which must be positive.
struct LinearModel {
  Eigen::MatrixXd design;             // n x p*, full column rank
  std::function<double(double)> h;    // log-density of the error
  std::function<double(double)> h1;   // h'
  std::function<double(double)> h2;   // h''
  double h_bar = 0.0;                 // averaged curvature, > 0
  double lipschitz_h2 = 0.0;          // Lipschitz constant of h''
  Eigen::VectorXd noise_scales;       // s_i, positive
};

LinearModel make_linear_model(const Eigen::MatrixXd& design, std::function<double(double)> h,
                              std::function<double(double)> h1, std::function<double(double)> h2,
                              double h_bar, double lipschitz_h2,
                              const Eigen::VectorXd& noise_scales);

// L(ups) = sum_i h(Y_i - Psi_i^T ups) and its derivatives in ups.
double linear_loglik(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                     const LinearModel& model);
Eigen::VectorXd linear_grad(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                            const LinearModel& model);
Eigen::MatrixXd linear_hessian(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& responses,
                               const LinearModel& model);

// D0^2 = h_bar * Psi^T Psi.
Eigen::MatrixXd linear_fisher(const LinearModel& model);

// delta(r) = L r / (h_bar sqrt(N1)) with 1/sqrt(N1) = max_i |D0^{-1} Psi_i|.
double linear_delta_r(double r, const LinearModel& model, const Eigen::MatrixXd& fisher);

// omega = sqrt(n) / N2 with 1/sqrt(N2) = max_i s_i |D0^{-1} Psi_i|.
double linear_omega(const LinearModel& model);

}  // namespace bvm
