#include "bvm/sieve.hpp"

#include <cmath>

#include "bvm/blockinfo.hpp"

namespace bvm {

SieveModel make_sieve_model(const Eigen::MatrixXd& target_design, const Eigen::VectorXd& points,
                            std::function<double(int, double)> nuisance_basis, int m, double s,
                            double sobolev_radius, double n3, double n4) {
  const Eigen::Index n = target_design.rows();
  if (n < 1) throw DimensionMismatch("SieveModel: need at least one design point");
  if (points.size() != n) throw DimensionMismatch("SieveModel: points must have n entries");
  if (!nuisance_basis) throw InvalidInput("SieveModel: nuisance_basis must be set");
  if (m < 0) throw InvalidInput("SieveModel: m must be non-negative");
  if (!(s > 0.0)) throw InvalidInput("SieveModel: s must be positive");
  if (!(sobolev_radius > 0.0)) throw InvalidInput("SieveModel: sobolev_radius must be positive");
  const double nd = double(n);
  return SieveModel{target_design, points, std::move(nuisance_basis), m, s,
                    sobolev_radius, n3 > 0.0 ? n3 : nd, n4 > 0.0 ? n4 : nd};
}

Eigen::MatrixXd sieve_design(const SieveModel& model) {
  const Eigen::Index n = model.target_design.rows();
  const Eigen::Index p = model.target_design.cols();
  Eigen::MatrixXd xi(n, p + model.m);
  xi.leftCols(p) = model.target_design;
  for (int k = 1; k <= model.m; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      xi(i, p + k - 1) = model.nuisance_basis(k, model.points(i));
    }
  }
  if (!full_column_rank(xi)) {
    throw RankDeficient("sieve_design: concatenated design lost full column rank");
  }
  return xi;
}

std::pair<double, double> sieve_bias(const SieveModel& model) {
  if (model.m < 1) throw InvalidInput("sieve_bias: m must be at least 1");
  const double alpha = model.sobolev_radius * model.n3 / std::pow(double(model.m), 2.0 * model.s);
  const double beta = model.sobolev_radius / model.n4;
  return {alpha, beta};
}

int sieve_choose_m(const SieveModel& model, double target) {
  if (!(target > 0.0)) throw InvalidInput("sieve_choose_m: target must be positive");
  const double n = double(model.target_design.rows());
  const double p = double(model.target_design.cols());
  const int cap = int(std::floor(std::cbrt(n) - p + 1e-9));
  SieveModel probe = model;
  for (int m = 1; m <= cap; ++m) {
    probe.m = m;
    const auto [alpha, beta] = sieve_bias(probe);
    if (std::max(alpha, beta) <= target) return m;
  }
  throw Infeasible("sieve_choose_m: no m within the cap n^{1/3} - p meets the target");
}

std::function<double(int, double)> fourier_basis() {
  return [](int k, double x) {
    if (k < 1) throw InvalidInput("fourier_basis: k must be at least 1");
    const double freq = 2.0 * M_PI * double((k + 1) / 2);
    const double sqrt2 = std::sqrt(2.0);
    return k % 2 == 1 ? sqrt2 * std::sin(freq * x) : sqrt2 * std::cos(freq * x);
  };
}

}  // namespace bvm
