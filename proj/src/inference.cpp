#include "bvm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bvm/gausstools.hpp"

namespace bvm {

namespace {

double log_prior_at(const PriorSpec& prior, const Eigen::VectorXd& upsilon) {
  if (!prior.gaussian) return 0.0;
  return -0.5 * upsilon.dot(prior.precision * upsilon);
}

void check_prior(const PriorSpec& prior, Eigen::Index p, const char* caller) {
  if (prior.gaussian && (prior.precision.rows() != p || prior.precision.cols() != p)) {
    throw DimensionMismatch(std::string(caller) +
                            ": prior precision must match the coordinate dimension");
  }
}

// Crude effective sample size from the lag-one autocorrelation of the first
// coordinate, clamped to [1, n].
long long ess_from_lag_one(const Eigen::MatrixXd& draws) {
  const Eigen::Index n = draws.rows();
  if (n < 2) return 1;
  const Eigen::ArrayXd x = draws.col(0).array() - draws.col(0).mean();
  const double denom = (x * x).sum();
  if (!(denom > 0.0)) return 1;
  const double rho = (x.head(n - 1) * x.tail(n - 1)).sum() / denom;
  double ess = double(n) * (1.0 - rho) / (1.0 + rho);
  if (!std::isfinite(ess)) ess = double(n);
  ess = std::clamp(ess, 1.0, double(n));
  return std::llround(ess);
}

// Shared Gamma stream: row k holds one independent draw of ups. Both callers
// below must consume the generator identically so their draws coincide.
template <typename Visit>
void gamma_stream(const Eigen::VectorXd& alpha, double scale, long long n_draws,
                  std::uint64_t rng_seed, Visit&& visit) {
  std::mt19937_64 rng(rng_seed);
  const Eigen::Index p = alpha.size();
  std::vector<std::gamma_distribution<double>> dist;
  dist.reserve(std::size_t(p));
  for (Eigen::Index j = 0; j < p; ++j) dist.emplace_back(alpha[j], scale);
  Eigen::VectorXd row(p);
  for (long long k = 0; k < n_draws; ++k) {
    for (Eigen::Index j = 0; j < p; ++j) row[j] = dist[std::size_t(j)](rng);
    visit(k, row);
  }
}

// Tensor-product trapezoid quadrature over center +- halfwidths. Two passes:
// the first locates the maximal log-density (and its boundary counterpart
// for the mass check), the second accumulates the normalized moments.
template <typename LogDensity>
PosteriorSummary grid_quadrature(LogDensity&& log_density, const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& halfwidths, int points_per_dim,
                                 const char* caller) {
  const Eigen::Index d = center.size();
  const std::string name(caller);
  if (d < 1 || d > 3) throw InvalidInput(name + ": quadrature covers one to three dimensions");
  if (halfwidths.size() != d) {
    throw DimensionMismatch(name + ": box center and halfwidths disagree");
  }
  if (!(halfwidths.minCoeff() > 0.0)) throw InvalidInput(name + ": halfwidths must be positive");
  if (points_per_dim < 31) {
    throw InvalidInput(name + ": at least 31 points per dimension required");
  }

  const long long m = points_per_dim;
  long long total = 1;
  for (Eigen::Index k = 0; k < d; ++k) total *= m;
  if (total > 100000000) throw InvalidInput(name + ": quadrature grid exceeds 1e8 nodes");

  const Eigen::VectorXd lo = center - halfwidths;
  const Eigen::VectorXd step = 2.0 * halfwidths / double(m - 1);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  double max_all = neg_inf;
  double max_boundary = neg_inf;
  Eigen::VectorXd node(d);
  for (long long flat = 0; flat < total; ++flat) {
    long long rem = flat;
    bool boundary = false;
    for (Eigen::Index k = 0; k < d; ++k) {
      const long long idx = rem % m;
      rem /= m;
      node[k] = lo[k] + step[k] * double(idx);
      boundary = boundary || idx == 0 || idx == m - 1;
    }
    const double value = log_density(node);
    if (std::isnan(value)) throw NonFiniteDensity(name + ": log-density evaluated to NaN");
    max_all = std::max(max_all, value);
    if (boundary) max_boundary = std::max(max_boundary, value);
  }
  if (!std::isfinite(max_all)) {
    throw NonFiniteDensity(name + ": the box carries no posterior mass");
  }
  if (max_boundary - max_all >= std::log(1e-8)) {
    throw BoxTooSmall(name + ": boundary density exceeds 1e-8 of the maximum");
  }

  double mass = 0.0;
  Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd dx(d);
  for (long long flat = 0; flat < total; ++flat) {
    long long rem = flat;
    double weight = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const long long idx = rem % m;
      rem /= m;
      node[k] = lo[k] + step[k] * double(idx);
      if (idx == 0 || idx == m - 1) weight *= 0.5;
    }
    const double f = weight * std::exp(log_density(node) - max_all);
    if (f == 0.0) continue;
    dx = node - center;
    mass += f;
    first += f * dx;
    second += f * dx * dx.transpose();
  }

  PosteriorSummary out;
  const Eigen::VectorXd shift = first / mass;
  out.mean = center + shift;
  out.cov = second / mass - shift * shift.transpose();
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  out.draw_count = 0;
  out.effective_sample_hint = 0;
  out.acceptance_rate = 1.0;
  return out;
}

}  // namespace

PosteriorSummary summarize_draws(const Eigen::MatrixXd& draws, bool keep_draws) {
  const Eigen::Index n = draws.rows();
  if (n < 1 || draws.cols() < 1) {
    throw InvalidInput("summarize_draws: need at least one draw of at least one coordinate");
  }
  PosteriorSummary out;
  out.mean = draws.colwise().mean();
  if (n > 1) {
    const Eigen::MatrixXd centered = draws.rowwise() - out.mean.transpose();
    out.cov = (centered.transpose() * centered) / double(n - 1);
  } else {
    out.cov = Eigen::MatrixXd::Zero(draws.cols(), draws.cols());
  }
  out.draw_count = n;
  out.effective_sample_hint = n;
  out.acceptance_rate = 1.0;
  if (keep_draws) out.draws = draws;
  return out;
}

PosteriorSummary target_block(const PosteriorSummary& summary, Eigen::Index p) {
  if (p < 1 || p > summary.mean.size()) {
    throw DimensionMismatch("target_block: target dimension out of range");
  }
  PosteriorSummary out;
  out.mean = summary.mean.head(p);
  out.cov = summary.cov.topLeftCorner(p, p);
  if (summary.draws.size() > 0) out.draws = summary.draws.leftCols(p);
  out.draw_count = summary.draw_count;
  out.effective_sample_hint = summary.effective_sample_hint;
  out.acceptance_rate = summary.acceptance_rate;
  return out;
}

PriorSpec flat_prior() { return PriorSpec(); }

PriorSpec gaussian_prior(const Eigen::MatrixXd& precision) {
  if (precision.rows() != precision.cols() || precision.rows() < 1) {
    throw DimensionMismatch("gaussian_prior: precision must be square");
  }
  PriorSpec prior;
  prior.gaussian = true;
  prior.precision = 0.5 * (precision + precision.transpose());
  return prior;
}

Eigen::VectorXd theta_circ(const Eigen::VectorXd& theta_star, const EfficientInfo& eff,
                           const Eigen::VectorXd& xi_breve) {
  const Eigen::Index p = theta_star.size();
  if (eff.sqrt.rows() != p || eff.sqrt.cols() != p || xi_breve.size() != p) {
    throw DimensionMismatch("theta_circ: dimensions disagree");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(eff.sqrt);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("theta_circ: the efficient root is not positive definite");
  }
  return theta_star + llt.solve(xi_breve);
}

PosteriorSummary sample_posterior_conjugate(const GroupedPoissonModel& model,
                                            const Eigen::VectorXd& z, long long n_draws,
                                            std::uint64_t rng_seed) {
  if (n_draws < 1) throw InvalidInput("sample_posterior_conjugate: n_draws must be positive");
  const auto [alpha, scale] = poisson_posterior_params(z, model);
  Eigen::MatrixXd draws(n_draws, 1);
  // Scalar reduction: keeps the target draws bitwise reproducible from the
  // raw Gamma draws regardless of SIMD packet math.
  gamma_stream(alpha, scale, n_draws, rng_seed,
               [&](long long k, const Eigen::VectorXd& row) {
                 double acc = 0.0;
                 for (Eigen::Index j = 0; j < row.size(); ++j) acc += std::log(row[j]);
                 draws(k, 0) = acc / double(row.size());
               });
  return summarize_draws(draws);
}

Eigen::MatrixXd sample_posterior_upsilon(const GroupedPoissonModel& model,
                                         const Eigen::VectorXd& z, long long n_draws,
                                         std::uint64_t rng_seed) {
  if (n_draws < 1) throw InvalidInput("sample_posterior_upsilon: n_draws must be positive");
  const auto [alpha, scale] = poisson_posterior_params(z, model);
  Eigen::MatrixXd draws(n_draws, model.p_n);
  gamma_stream(alpha, scale, n_draws, rng_seed,
               [&](long long k, const Eigen::VectorXd& row) { draws.row(k) = row; });
  return draws;
}

PosteriorSummary posterior_grid_oracle(const GroupedPoissonModel& model,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& box_center,
                                       const Eigen::VectorXd& box_halfwidths,
                                       int points_per_dim) {
  if (model.p_n > 3) {
    throw InvalidInput("posterior_grid_oracle: p_n exceeds the quadrature limit of three");
  }
  if (box_center.size() != model.p_n) {
    throw DimensionMismatch("posterior_grid_oracle: box dimension must equal p_n");
  }
  if (box_halfwidths.size() == box_center.size() &&
      !((box_center - box_halfwidths).minCoeff() > 0.0)) {
    throw InvalidInput("posterior_grid_oracle: box must lie inside the positive orthant");
  }
  const Eigen::VectorXd z = poisson_group_sums(y, model);
  const double rate = double(model.m_n) + 1.0 / model.prior_scale;
  auto log_density = [&](const Eigen::VectorXd& ups) {
    double value = 0.0;
    for (Eigen::Index j = 0; j < ups.size(); ++j) {
      value += z[j] * std::log(ups[j]) - rate * ups[j];
    }
    return value;
  };
  return grid_quadrature(log_density, box_center, box_halfwidths, points_per_dim,
                         "posterior_grid_oracle");
}

PosteriorSummary posterior_grid_oracle(const GlmModel& model, const Eigen::VectorXd& box_center,
                                       const Eigen::VectorXd& box_halfwidths, int points_per_dim,
                                       const PriorSpec& prior) {
  const Eigen::Index p = model.design.cols();
  if (p > 3) {
    throw InvalidInput("posterior_grid_oracle: p* exceeds the quadrature limit of three");
  }
  if (box_center.size() != p) {
    throw DimensionMismatch("posterior_grid_oracle: box dimension must equal p*");
  }
  check_prior(prior, p, "posterior_grid_oracle");
  auto log_density = [&](const Eigen::VectorXd& ups) {
    return glm_loglik(ups, model) + log_prior_at(prior, ups);
  };
  return grid_quadrature(log_density, box_center, box_halfwidths, points_per_dim,
                         "posterior_grid_oracle");
}

PosteriorSummary sample_posterior_rw(const GlmModel& model, const PriorSpec& prior,
                                     long long n_draws, long long burn_in, long long thin,
                                     double proposal_scale, std::uint64_t rng_seed,
                                     Eigen::VectorXd init) {
  const Eigen::Index p = model.design.cols();
  if (n_draws < 1) throw InvalidInput("sample_posterior_rw: n_draws must be positive");
  if (thin < 1) throw InvalidInput("sample_posterior_rw: thin must be positive");
  check_prior(prior, p, "sample_posterior_rw");
  if (burn_in < 0) burn_in = std::min<long long>(10 * 1000 * p, 100000);
  if (!(proposal_scale > 0.0)) proposal_scale = 2.4 / std::sqrt(double(p));

  Eigen::VectorXd state;
  if (init.size() == 0) {
    state = glm_mle(model);
  } else if (init.size() == p) {
    state = std::move(init);
  } else {
    throw DimensionMismatch("sample_posterior_rw: init size must equal p*");
  }

  auto log_post = [&](const Eigen::VectorXd& ups) {
    return glm_loglik(ups, model) + log_prior_at(prior, ups);
  };
  double current = log_post(state);
  if (!std::isfinite(current)) {
    throw NonFiniteDensity("sample_posterior_rw: no posterior density at the starting point");
  }
  const Eigen::MatrixXd root = symmetric_inverse(symmetric_sqrt(glm_fisher(state, model)));

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const long long total = burn_in + n_draws * thin;
  long long accepted = 0;
  long long row = 0;
  Eigen::MatrixXd draws(n_draws, p);
  Eigen::VectorXd noise(p);
  Eigen::VectorXd proposal(p);
  for (long long iter = 1; iter <= total; ++iter) {
    for (Eigen::Index k = 0; k < p; ++k) noise[k] = gauss(rng);
    proposal = state + proposal_scale * (root * noise);
    const double candidate = log_post(proposal);
    const double u = unif(rng);
    if (std::log(u) < candidate - current) {
      state = proposal;
      current = candidate;
      ++accepted;
    }
    if (iter > burn_in && (iter - burn_in) % thin == 0) draws.row(row++) = state;
  }

  PosteriorSummary out = summarize_draws(draws);
  out.acceptance_rate = double(accepted) / double(total);
  out.effective_sample_hint = ess_from_lag_one(draws);
  return out;
}

BvmDiagnostic diagnose(const PosteriorSummary& summary, const Eigen::VectorXd& theta_circ,
                       const EfficientInfo& eff, const BvmBudget& budget) {
  const Eigen::Index p = theta_circ.size();
  if (summary.mean.size() != p || summary.cov.rows() != p || summary.cov.cols() != p ||
      eff.sqrt.rows() != p || eff.sqrt.cols() != p) {
    throw DimensionMismatch("diagnose: summary, center and efficient information disagree");
  }

  BvmDiagnostic out;
  out.theta_circ = theta_circ;
  out.budget = budget;

  const Eigen::VectorXd beta = eff.sqrt * (summary.mean - theta_circ);
  out.mean_err = beta.squaredNorm();

  Eigen::MatrixXd standardized = eff.sqrt * summary.cov * eff.sqrt;
  standardized = (0.5 * (standardized + standardized.transpose())).eval();
  out.cov_err = operator_norm(Eigen::MatrixXd::Identity(p, p) - standardized);

  const Eigen::MatrixXd u = symmetric_inverse(symmetric_sqrt(standardized));
  out.tv_est = tv_pinsker(kl_gaussians(u, beta));

  const double tail = std::exp(-budget.x);
  const double upper_dev = budget.tv_factor - 1.0;
  const double lower_dev = 1.0 - std::exp(-2.0 * budget.delta - 8.0 * tail) + tail;
  out.tv_budget = std::min(1.0, std::max(upper_dev, lower_dev));

  out.mean_ok = out.mean_err <= budget.mean_bound;
  out.cov_ok = out.cov_err <= budget.cov_bound;
  out.tv_ok = out.tv_est <= out.tv_budget;
  return out;
}

Eigen::VectorXd standardized_target_draws(const PosteriorSummary& summary, double profile_mle,
                                          long long m_n) {
  if (summary.draws.cols() != 1) {
    throw DimensionMismatch("standardized_target_draws: summary must hold scalar-target draws");
  }
  if (m_n < 1) throw InvalidInput("standardized_target_draws: m_n must be positive");
  return std::sqrt(double(m_n)) * (summary.draws.col(0).array() - profile_mle).matrix();
}

double empirical_tv_1d(const Eigen::VectorXd& draws, double mu, double sigma2, int n_bins) {
  if (draws.size() < 1) throw InvalidInput("empirical_tv_1d: draws must be non-empty");
  if (!(sigma2 > 0.0)) throw InvalidInput("empirical_tv_1d: sigma2 must be positive");
  if (n_bins < 1) throw InvalidInput("empirical_tv_1d: n_bins must be positive");

  const double lo = draws.minCoeff();
  const double hi = draws.maxCoeff();
  const double sd = std::sqrt(sigma2);
  auto cdf = [&](double t) { return 0.5 * std::erfc(-(t - mu) / (sd * std::sqrt(2.0))); };
  if (!(hi > lo)) return 1.0;  // point mass against a continuous law

  const double width = (hi - lo) / double(n_bins);
  std::vector<long long> count(std::size_t(n_bins), 0);
  for (Eigen::Index i = 0; i < draws.size(); ++i) {
    const auto bin = std::min<long long>(n_bins - 1, (long long)((draws[i] - lo) / width));
    ++count[std::size_t(std::max<long long>(0, bin))];
  }
  double l1 = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double q = cdf(lo + double(b + 1) * width) - cdf(lo + double(b) * width);
    l1 += std::abs(double(count[std::size_t(b)]) / double(draws.size()) - q);
  }
  const double outside = 1.0 - (cdf(hi) - cdf(lo));
  return std::min(1.0, 0.5 * (l1 + outside));
}

}  // namespace bvm
