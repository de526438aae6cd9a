#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "bvm/errors.hpp"

namespace bvm {

// Semiparametric regression with a smooth nuisance expanded in a basis
// phi_1, phi_2, ... truncated at level m. The nuisance lies in a Sobolev
// ball of smoothness s and radius sobolev_radius; n3 and n4 are the design
// constants of the bias bounds and default to the sample size.
struct SieveModel {
  Eigen::MatrixXd target_design;                     // n x p (p = 0 allowed)
  Eigen::VectorXd points;                            // design points X_i
  std::function<double(int, double)> nuisance_basis; // phi_k(x), k >= 1
  int m = 0;                                         // truncation level
  double s = 0.0;                                    // smoothness
  double sobolev_radius = 0.0;
  double n3 = 0.0;
  double n4 = 0.0;
};

// Pass n3 or n4 <= 0 to default them to the number of design points.
SieveModel make_sieve_model(const Eigen::MatrixXd& target_design, const Eigen::VectorXd& points,
                            std::function<double(int, double)> nuisance_basis, int m, double s,
                            double sobolev_radius, double n3 = -1.0, double n4 = -1.0);

// Concatenated design [Psi | Phi], Phi_ik = phi_k(X_i) for k = 1..m.
// m = 0 returns the target design unchanged.
Eigen::MatrixXd sieve_design(const SieveModel& model);

// Truncation-bias pair (alpha_m, beta_m) under the regular-design
// simplification: alpha_m = C n3 / m^{2s}, beta_m = C / n4.
std::pair<double, double> sieve_bias(const SieveModel& model);

// Smallest m with max(alpha_m, beta_m) <= target, subject to the sieve
// dimension cap m <= n^{1/3} - p.
int sieve_choose_m(const SieveModel& model, double target);

// Orthonormal Fourier system on [0,1]: k = 1, 2, 3, 4, ... gives
// sqrt(2) sin(2 pi x), sqrt(2) cos(2 pi x), sqrt(2) sin(4 pi x), ...
std::function<double(int, double)> fourier_basis();

}  // namespace bvm
