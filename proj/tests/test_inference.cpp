#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "bvm/blockinfo.hpp"
#include "bvm/gausstools.hpp"
#include "bvm/glm.hpp"
#include "bvm/grouped_poisson.hpp"
#include "bvm/inference.hpp"

using namespace bvm;

namespace {

// Digamma through a centered difference of lgamma; accurate to ~1e-11 for
// the shape values used here, far below the Monte Carlo tolerances.
double digamma(double a) {
  const double h = 1e-6;
  return (std::lgamma(a + h) - std::lgamma(a - h)) / (2.0 * h);
}

Eigen::MatrixXd random_design(int n, int p, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd psi(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) psi(i, j) = unif(rng);
  }
  return psi;
}

// Intercept plus a centered slope column: the Gram matrix is diagonal, so
// closed-form Gaussian posteriors have independent coordinates.
Eigen::MatrixXd orthogonal_design(int n) {
  Eigen::MatrixXd psi(n, 2);
  for (int i = 0; i < n; ++i) {
    psi(i, 0) = 1.0;
    psi(i, 1) = -1.0 + 2.0 * double(i) / double(n - 1);
  }
  return psi;
}

// Batch-means standard error of each column mean.
Eigen::VectorXd batch_se_mean(const Eigen::MatrixXd& draws, int n_batches) {
  const Eigen::Index len = draws.rows() / n_batches;
  Eigen::MatrixXd means(n_batches, draws.cols());
  for (int b = 0; b < n_batches; ++b) {
    means.row(b) = draws.middleRows(Eigen::Index(b) * len, len).colwise().mean();
  }
  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Eigen::MatrixXd centered = means.rowwise() - grand;
  const Eigen::VectorXd var =
      centered.array().square().colwise().sum().transpose() / double(n_batches - 1);
  return (var / double(n_batches)).array().sqrt();
}

// Batch-means standard error of each covariance entry.
Eigen::MatrixXd batch_se_cov(const Eigen::MatrixXd& draws, int n_batches) {
  const Eigen::Index len = draws.rows() / n_batches;
  const Eigen::Index p = draws.cols();
  std::vector<Eigen::MatrixXd> covs;
  for (int b = 0; b < n_batches; ++b) {
    const Eigen::MatrixXd block = draws.middleRows(Eigen::Index(b) * len, len);
    const Eigen::MatrixXd centered = block.rowwise() - block.colwise().mean();
    covs.push_back((centered.transpose() * centered) / double(len - 1));
  }
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(p, p);
  for (const auto& c : covs) mean += c;
  mean /= double(n_batches);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(p, p);
  for (const auto& c : covs) var += (c - mean).array().square().matrix();
  var /= double(n_batches - 1);
  return (var / double(n_batches)).array().sqrt();
}

EfficientInfo efficient_from_spd(const Eigen::MatrixXd& m) {
  EfficientInfo eff;
  eff.matrix = m;
  eff.inverse = symmetric_inverse(m);
  eff.sqrt = symmetric_sqrt(m);
  return eff;
}

GlmModel seeded_glm_instance(GlmFamily family, int n, int p, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(0.05, 0.6);
  Eigen::MatrixXd psi(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) psi(i, j) = entry(rng);
  }
  std::uniform_real_distribution<double> coef(-1.5, -0.4);
  Eigen::VectorXd ups(p);
  for (int j = 0; j < p; ++j) ups(j) = coef(rng);
  const Eigen::VectorXd y = sample_glm_responses(psi, family, ups, rng);
  return make_glm_model(psi, family, y, Eigen::VectorXd::Ones(n), 1.0);
}

}  // namespace

TEST_CASE("summarize_draws moments and exact recomputability") {
  Eigen::MatrixXd draws(4, 2);
  draws << 1.0, 2.0, 3.0, 5.0, -1.0, 0.5, 2.0, 4.0;

  const PosteriorSummary s = summarize_draws(draws);
  CHECK(s.draw_count == 4);
  CHECK(s.effective_sample_hint == 4);
  CHECK(s.acceptance_rate == 1.0);
  CHECK(s.mean(0) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(s.mean(1) == doctest::Approx(2.875).epsilon(1e-14));

  // Hand computation with the (n-1) divisor.
  const Eigen::MatrixXd centered = draws.rowwise() - s.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / 3.0;
  CHECK((s.cov - cov).norm() == 0.0);

  // Recomputing from the retained draws reproduces the stored moments.
  const PosteriorSummary again = summarize_draws(s.draws);
  CHECK((again.mean - s.mean).norm() == 0.0);
  CHECK((again.cov - s.cov).norm() == 0.0);

  const PosteriorSummary dropped = summarize_draws(draws, false);
  CHECK(dropped.draws.size() == 0);
  CHECK(dropped.draw_count == 4);

  const PosteriorSummary single = summarize_draws(draws.topRows(1));
  CHECK(single.cov.norm() == 0.0);

  CHECK_THROWS_AS(summarize_draws(Eigen::MatrixXd()), InvalidInput);
}

TEST_CASE("target_block restricts moments and draws") {
  Eigen::MatrixXd draws(5, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 3; ++j) draws(i, j) = gauss(rng);
  }
  const PosteriorSummary full = summarize_draws(draws);
  const PosteriorSummary head = target_block(full, 2);
  CHECK((head.mean - full.mean.head(2)).norm() == 0.0);
  CHECK((head.cov - full.cov.topLeftCorner(2, 2)).norm() == 0.0);
  CHECK((head.draws - draws.leftCols(2)).norm() == 0.0);
  CHECK(head.draw_count == 5);
  CHECK_THROWS_AS(target_block(full, 0), DimensionMismatch);
  CHECK_THROWS_AS(target_block(full, 4), DimensionMismatch);
}

TEST_CASE("theta_circ arithmetic cases") {
  EfficientInfo eff;
  eff.matrix = Eigen::MatrixXd::Constant(1, 1, 4.0);
  eff.inverse = Eigen::MatrixXd::Constant(1, 1, 0.25);
  eff.sqrt = Eigen::MatrixXd::Constant(1, 1, 2.0);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  CHECK(theta_circ(zero, eff, one)(0) == doctest::Approx(0.5).epsilon(1e-15));

  // Zero efficient score leaves theta* untouched.
  Eigen::MatrixXd spd = random_design(3, 3, 9);
  spd = Eigen::MatrixXd(spd.transpose() * spd) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
  const EfficientInfo eff3 = efficient_from_spd(spd);
  const Eigen::VectorXd star = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  CHECK((theta_circ(star, eff3, Eigen::VectorXd::Zero(3)) - star).norm() == 0.0);

  CHECK_THROWS_AS(theta_circ(star, eff3, Eigen::VectorXd::Zero(2)), DimensionMismatch);
}

TEST_CASE("theta_circ reproduces the flat-prior posterior mean in the quadratic family") {
  // For the gaussian family the log-likelihood is exactly quadratic, so the
  // flat-prior posterior mean is the MLE, and the first-order formula applied
  // at any reference point must land exactly on its target block.
  const int n = 40;
  const Eigen::MatrixXd psi = random_design(n, 4, 21);
  std::mt19937_64 rng(22);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = 0.4 * psi(i, 0) - 0.2 * psi(i, 3) + gauss(rng);
  const GlmModel model =
      make_glm_model(psi, GlmFamily::gaussian, y, Eigen::VectorXd::Ones(n), 0.0);

  Eigen::VectorXd star(4);
  star << 0.3, -0.1, 0.2, 0.05;
  const FullInfo info = split_full_info(glm_fisher(star, model), 2);
  const EfficientInfo eff = schur_complement(info);
  const Eigen::VectorXd grad = glm_grad(star, model);
  FullScore score;
  score.target_grad = grad.head(2);
  score.nuisance_grad = grad.tail(2);
  const Eigen::VectorXd xi = efficient_score(info, score);

  const Eigen::VectorXd center = theta_circ(star.head(2), eff, xi);
  const Eigen::VectorXd mle = glm_mle(model);
  CHECK((center - mle.head(2)).norm() <= 1e-9);
}

TEST_CASE("conjugate sampler matches Gamma closed-form moments") {
  const GroupedPoissonModel model = make_grouped_poisson(3, 5, 2.0);
  Eigen::VectorXd z(3);
  z << 4.0, 7.0, 0.0;
  const auto [alpha, scale] = poisson_posterior_params(z, model);
  CHECK(scale == doctest::Approx(2.0 / 11.0).epsilon(1e-15));

  const long long n_draws = 100000;
  const Eigen::MatrixXd ups = sample_posterior_upsilon(model, z, n_draws, 101);
  REQUIRE(ups.rows() == n_draws);
  REQUIRE(ups.cols() == 3);

  for (int j = 0; j < 3; ++j) {
    const double mean = alpha(j) * scale;
    const double sd = std::sqrt(alpha(j)) * scale;
    const double se = sd / std::sqrt(double(n_draws));
    CHECK(std::abs(ups.col(j).mean() - mean) <= 4.0 * se);

    // E log ups_j = digamma(alpha_j) + log scale.
    const Eigen::ArrayXd logs = ups.col(j).array().log();
    const double log_mean = logs.mean();
    const double log_sd = std::sqrt((logs - log_mean).square().sum() / double(n_draws - 1));
    CHECK(std::abs(log_mean - (digamma(alpha(j)) + std::log(scale))) <=
          4.0 * log_sd / std::sqrt(double(n_draws)));
  }

  // The theta draws are exactly the row means of the elementwise log.
  const PosteriorSummary summary = sample_posterior_conjugate(model, z, n_draws, 101);
  Eigen::VectorXd expected(n_draws);
  for (Eigen::Index k = 0; k < n_draws; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ups.cols(); ++j) acc += std::log(ups(k, j));
    expected(k) = acc / double(ups.cols());
  }
  CHECK((summary.draws.col(0) - expected).norm() == 0.0);
  CHECK(summary.draw_count == n_draws);

  CHECK_THROWS_AS(sample_posterior_conjugate(model, z, 0, 1), InvalidInput);
}

TEST_CASE("conjugate sampler is deterministic per seed") {
  const GroupedPoissonModel model = make_grouped_poisson(4, 3, 1.0);
  Eigen::VectorXd z(4);
  z << 2.0, 5.0, 1.0, 3.0;
  const PosteriorSummary a = sample_posterior_conjugate(model, z, 500, 42);
  const PosteriorSummary b = sample_posterior_conjugate(model, z, 500, 42);
  const PosteriorSummary c = sample_posterior_conjugate(model, z, 500, 43);
  CHECK((a.draws - b.draws).norm() == 0.0);
  CHECK((a.draws - c.draws).norm() != 0.0);
}

TEST_CASE("conjugate sampler concentrates at the profile MLE under a flat prior") {
  // Huge prior scale and large counts: the posterior mean of the target is
  // within noise of (1/p) sum log(Z_j / m_n).
  const GroupedPoissonModel model = make_grouped_poisson(5, 1000, 1e12, NAN, 1e13);
  Eigen::VectorXd z(5);
  z << 1.0e6, 1.2e6, 0.9e6, 1.1e6, 1.05e6;
  const double tilde = poisson_profile_mle(z, model);
  const PosteriorSummary summary = sample_posterior_conjugate(model, z, 20000, 7);
  CHECK(std::abs(summary.mean(0) - tilde) <= 1e-3);
  CHECK(std::sqrt(summary.cov(0, 0)) <= 1e-2);
}

TEST_CASE("grid oracle recovers the conjugate Gamma law in one dimension") {
  // One group, two counts summing to 2, unit prior scale: the posterior of
  // ups is Gamma(3, 1/3) with mean 1 and variance 1/3.
  GroupedPoissonModel model;
  model.p_n = 1;
  model.m_n = 2;
  model.u_star = 0.0;
  model.prior_scale = 1.0;
  Eigen::VectorXd y(2);
  y << 2.0, 0.0;

  const double lo = 5e-6;
  const double hi = 10.0;
  Eigen::VectorXd center(1), hw(1);
  center << 0.5 * (lo + hi);
  hw << 0.5 * (hi - lo);

  const PosteriorSummary fine = posterior_grid_oracle(model, y, center, hw, 4001);
  CHECK(fine.mean(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fine.cov(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(3e-6));
  CHECK(fine.draw_count == 0);

  // Doubling the resolution moves the moments by less than 1e-6.
  const PosteriorSummary coarse = posterior_grid_oracle(model, y, center, hw, 2001);
  CHECK(std::abs(fine.mean(0) - coarse.mean(0)) < 1e-6);
  CHECK(std::abs(fine.cov(0, 0) - coarse.cov(0, 0)) < 1e-6);

  // A box cutting off the right tail fails the boundary mass check.
  Eigen::VectorXd small_center(1), small_hw(1);
  small_center << 0.5 * (lo + 2.0);
  small_hw << 0.5 * (2.0 - lo);
  CHECK_THROWS_AS(posterior_grid_oracle(model, y, small_center, small_hw, 2001), BoxTooSmall);

  // The box must stay inside the positive orthant.
  Eigen::VectorXd bad_center(1), bad_hw(1);
  bad_center << 5.0;
  bad_hw << 5.0;
  CHECK_THROWS_AS(posterior_grid_oracle(model, y, bad_center, bad_hw, 2001), InvalidInput);

  CHECK_THROWS_AS(posterior_grid_oracle(model, y, center, hw, 30), InvalidInput);
  CHECK_THROWS_AS(posterior_grid_oracle(model, y, center, Eigen::VectorXd::Ones(2), 101),
                  DimensionMismatch);
}

TEST_CASE("grid oracle factorizes over groups in two dimensions") {
  const GroupedPoissonModel model = make_grouped_poisson(2, 2, 1.0);
  Eigen::VectorXd y(4);
  y << 1.0, 1.0, 2.0, 1.0;  // group sums 2 and 3

  Eigen::VectorXd center(2), hw(2);
  center << 0.5 * (12.0 + 5e-6), 0.5 * (12.0 + 5e-6);
  hw << 0.5 * (12.0 - 5e-6), 0.5 * (12.0 - 5e-6);
  const PosteriorSummary s = posterior_grid_oracle(model, y, center, hw, 601);

  // Independent Gamma(3, 1/3) and Gamma(4, 1/3) marginals.
  CHECK(s.mean(0) == doctest::Approx(1.0).epsilon(5e-6));
  CHECK(s.mean(1) == doctest::Approx(4.0 / 3.0).epsilon(5e-6));
  CHECK(s.cov(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(2e-5));
  CHECK(s.cov(1, 1) == doctest::Approx(4.0 / 9.0).epsilon(2e-5));
  CHECK(std::abs(s.cov(0, 1)) <= 1e-6);

  GroupedPoissonModel wide;
  wide.p_n = 4;
  wide.m_n = 1;
  CHECK_THROWS_AS(posterior_grid_oracle(wide, Eigen::VectorXd::Ones(4),
                                        Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4), 101),
                  InvalidInput);
}

TEST_CASE("grid oracle matches the closed-form Gaussian posterior") {
  const int n = 30;
  const Eigen::MatrixXd psi = orthogonal_design(n);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = 0.5 + 0.8 * psi(i, 1) + gauss(rng);
  const GlmModel model =
      make_glm_model(psi, GlmFamily::gaussian, y, Eigen::VectorXd::Ones(n), 0.0);

  const Eigen::MatrixXd gram = psi.transpose() * psi;
  const Eigen::VectorXd mle = gram.llt().solve(psi.transpose() * y);
  const Eigen::MatrixXd cov = gram.inverse();

  Eigen::VectorXd hw(2);
  hw << 10.0 * std::sqrt(cov(0, 0)), 10.0 * std::sqrt(cov(1, 1));
  const PosteriorSummary s = posterior_grid_oracle(model, mle, hw, 241);
  CHECK((s.mean - mle).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((s.cov - cov).cwiseAbs().maxCoeff() <= 1e-8);

  // Gaussian prior: precision adds to the Gram matrix.
  const Eigen::MatrixXd g2 = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd ridge_cov = (gram + g2).inverse();
  const Eigen::VectorXd ridge_mean = (gram + g2).llt().solve(psi.transpose() * y);
  Eigen::VectorXd ridge_hw(2);
  ridge_hw << 10.0 * std::sqrt(ridge_cov(0, 0)), 10.0 * std::sqrt(ridge_cov(1, 1));
  const PosteriorSummary r =
      posterior_grid_oracle(model, ridge_mean, ridge_hw, 241, gaussian_prior(g2));
  CHECK((r.mean - ridge_mean).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((r.cov - ridge_cov).cwiseAbs().maxCoeff() <= 1e-8);

  // A half-sigma box keeps most of the mass outside.
  Eigen::VectorXd tiny(2);
  tiny << 0.5 * std::sqrt(cov(0, 0)), 0.5 * std::sqrt(cov(1, 1));
  CHECK_THROWS_AS(posterior_grid_oracle(model, mle, tiny, 101), BoxTooSmall);
}

TEST_CASE("grid oracle recovers the negative-Gamma law of the exponential family") {
  // Unit design and unit responses: the posterior of -ups is Gamma(n+1, n),
  // so mean = -(n+1)/n scaled by sum Y = 10 and variance (n+1)/(sum Y)^2.
  const int n = 10;
  const GlmModel model = make_glm_model(Eigen::MatrixXd::Ones(n, 1), GlmFamily::exponential,
                                        Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n), 1.0);
  Eigen::VectorXd center(1), hw(1);
  center << 0.5 * (-5.0 - 1e-4);
  hw << 0.5 * (5.0 - 1e-4);
  const PosteriorSummary s = posterior_grid_oracle(model, center, hw, 4001);
  CHECK(s.mean(0) == doctest::Approx(-1.1).epsilon(1e-6));
  CHECK(s.cov(0, 0) == doctest::Approx(0.11).epsilon(1e-5));

  CHECK_THROWS_AS(posterior_grid_oracle(seeded_glm_instance(GlmFamily::gaussian, 10, 4, 1),
                                        Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4), 101),
                  InvalidInput);
}

TEST_CASE("random-walk sampler matches the closed-form Gaussian posterior") {
  const int n = 30;
  const Eigen::MatrixXd psi = orthogonal_design(n);
  std::mt19937_64 rng(33);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = -0.3 + 0.6 * psi(i, 1) + gauss(rng);
  const GlmModel model =
      make_glm_model(psi, GlmFamily::gaussian, y, Eigen::VectorXd::Ones(n), 0.0);

  const Eigen::MatrixXd gram = psi.transpose() * psi;
  const Eigen::VectorXd mle = gram.llt().solve(psi.transpose() * y);
  const Eigen::MatrixXd cov = gram.inverse();

  const PosteriorSummary s = sample_posterior_rw(model, flat_prior(), 40000, -1, 1, 0.0, 5);
  CHECK(s.draw_count == 40000);
  CHECK(s.acceptance_rate > 0.1);
  CHECK(s.acceptance_rate < 0.8);
  CHECK(s.effective_sample_hint >= 1);
  CHECK(s.effective_sample_hint <= 40000);

  const Eigen::VectorXd se = batch_se_mean(s.draws, 20);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(s.mean(j) - mle(j)) <= 4.0 * se(j) + 1e-10);
  }
  const Eigen::MatrixXd cov_se = batch_se_cov(s.draws, 20);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(s.cov(a, b) - cov(a, b)) <= 4.0 * cov_se(a, b) + 1e-6);
    }
  }
}

TEST_CASE("random-walk sampler respects a Gaussian prior") {
  const int n = 20;
  const Eigen::MatrixXd psi = Eigen::MatrixXd::Ones(n, 1);
  std::mt19937_64 rng(44);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = 0.7 + gauss(rng);
  const GlmModel model =
      make_glm_model(psi, GlmFamily::gaussian, y, Eigen::VectorXd::Ones(n), 0.0);

  const double g2 = 4.0;
  const double closed_mean = y.sum() / (double(n) + g2);
  const double closed_var = 1.0 / (double(n) + g2);
  const PosteriorSummary s = sample_posterior_rw(
      model, gaussian_prior(Eigen::MatrixXd::Constant(1, 1, g2)), 30000, -1, 1, 0.0, 6);
  const Eigen::VectorXd se = batch_se_mean(s.draws, 20);
  CHECK(std::abs(s.mean(0) - closed_mean) <= 4.0 * se(0) + 1e-10);
  CHECK(s.cov(0, 0) == doctest::Approx(closed_var).epsilon(0.1));
}

TEST_CASE("random-walk sampler agrees with the grid oracle across families") {
  struct Instance {
    GlmFamily family;
    int p;
    unsigned seed;
  };
  const Instance cases[] = {
      {GlmFamily::gaussian, 1, 210},    {GlmFamily::gaussian, 2, 211},
      {GlmFamily::logistic, 1, 212},    {GlmFamily::logistic, 2, 213},
      {GlmFamily::poisson, 1, 214},     {GlmFamily::poisson, 2, 215},
      {GlmFamily::exponential, 1, 216}, {GlmFamily::exponential, 2, 217},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.family));
    CAPTURE(c.p);
    const GlmModel model = seeded_glm_instance(c.family, 200, c.p, c.seed);
    const Eigen::VectorXd mle = glm_mle(model);
    const Eigen::MatrixXd cov = symmetric_inverse(glm_fisher(mle, model));
    Eigen::VectorXd hw(c.p);
    for (int j = 0; j < c.p; ++j) hw(j) = 10.0 * std::sqrt(cov(j, j));
    const PosteriorSummary grid = posterior_grid_oracle(model, mle, hw, 151);
    const PosteriorSummary chain =
        sample_posterior_rw(model, flat_prior(), 30000, -1, 1, 0.0, c.seed);
    const Eigen::VectorXd se = batch_se_mean(chain.draws, 20);
    for (int j = 0; j < c.p; ++j) {
      CHECK(std::abs(chain.mean(j) - grid.mean(j)) <= 4.0 * se(j) + 1e-10);
    }
    const Eigen::MatrixXd cov_se = batch_se_cov(chain.draws, 20);
    for (int a = 0; a < c.p; ++a) {
      for (int b = 0; b < c.p; ++b) {
        CHECK(std::abs(chain.cov(a, b) - grid.cov(a, b)) <= 4.0 * cov_se(a, b) + 1e-6);
      }
    }
  }
}

TEST_CASE("random-walk sampler is symmetric for a symmetric target") {
  // Duplicated rows with complementary responses make the log-likelihood an
  // even function, so the posterior mean is the origin.
  const int pairs = 20;
  Eigen::MatrixXd psi(2 * pairs, 2);
  Eigen::VectorXd y(2 * pairs);
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < pairs; ++k) {
    const double a = unif(rng);
    const double b = unif(rng);
    psi.row(2 * k) << a, b;
    psi.row(2 * k + 1) << a, b;
    y(2 * k) = 1.0;
    y(2 * k + 1) = 0.0;
  }
  const GlmModel model =
      make_glm_model(psi, GlmFamily::logistic, y, Eigen::VectorXd::Ones(2 * pairs), 0.2);
  const PosteriorSummary s = sample_posterior_rw(model, flat_prior(), 30000, -1, 1, 0.0, 8,
                                                 Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd se = batch_se_mean(s.draws, 20);
  CHECK(std::abs(s.mean(0)) <= 4.0 * se(0));
  CHECK(std::abs(s.mean(1)) <= 4.0 * se(1));
}

TEST_CASE("random-walk sampler determinism and input validation") {
  const GlmModel model = seeded_glm_instance(GlmFamily::logistic, 80, 2, 77);
  const PosteriorSummary a = sample_posterior_rw(model, flat_prior(), 2000, 500, 1, 0.0, 9);
  const PosteriorSummary b = sample_posterior_rw(model, flat_prior(), 2000, 500, 1, 0.0, 9);
  const PosteriorSummary c = sample_posterior_rw(model, flat_prior(), 2000, 500, 1, 0.0, 10);
  CHECK((a.draws - b.draws).norm() == 0.0);
  CHECK(a.acceptance_rate == b.acceptance_rate);
  CHECK((a.draws - c.draws).norm() != 0.0);

  const PosteriorSummary thinned = sample_posterior_rw(model, flat_prior(), 2000, 500, 3, 0.0, 9);
  CHECK(thinned.draw_count == 2000);
  CHECK((thinned.draws - a.draws).norm() != 0.0);

  CHECK_THROWS_AS(sample_posterior_rw(model, flat_prior(), 0), InvalidInput);
  CHECK_THROWS_AS(sample_posterior_rw(model, flat_prior(), 100, -1, 0), InvalidInput);
  CHECK_THROWS_AS(
      sample_posterior_rw(model, flat_prior(), 100, -1, 1, 0.0, 1, Eigen::VectorXd::Zero(5)),
      DimensionMismatch);
  CHECK_THROWS_AS(
      sample_posterior_rw(model, gaussian_prior(Eigen::MatrixXd::Identity(3, 3)), 100),
      DimensionMismatch);

  // Exponential family with a start in the infeasible half-space.
  const GlmModel expo = make_glm_model(Eigen::MatrixXd::Ones(10, 1), GlmFamily::exponential,
                                       Eigen::VectorXd::Ones(10), Eigen::VectorXd::Ones(10), 1.0);
  CHECK_THROWS_AS(
      sample_posterior_rw(expo, flat_prior(), 100, -1, 1, 0.0, 1, Eigen::VectorXd::Ones(1)),
      NonFiniteDensity);
}

TEST_CASE("diagnose reports zero discrepancies at the Gaussian limit") {
  Eigen::MatrixXd base = random_design(3, 3, 61);
  base = Eigen::MatrixXd(base.transpose() * base) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
  const EfficientInfo eff = efficient_from_spd(base);

  PosteriorSummary summary;
  summary.mean = Eigen::VectorXd::LinSpaced(3, -0.5, 0.4);
  summary.cov = eff.inverse;
  summary.draw_count = 0;

  BvmBudget budget;
  budget.delta = 0.01;
  budget.x = 3.0;
  budget.mean_bound = 0.1;
  budget.cov_bound = 0.1;
  budget.tv_factor = std::exp(2.0 * budget.delta + 5.0 * std::exp(-budget.x));

  const BvmDiagnostic diag = diagnose(summary, summary.mean, eff, budget);
  CHECK(diag.mean_err == 0.0);
  CHECK(diag.cov_err <= 1e-10);
  CHECK(diag.tv_est <= 1e-6);
  CHECK(diag.mean_ok);
  CHECK(diag.cov_ok);
  CHECK(diag.tv_ok);
  CHECK((diag.theta_circ - summary.mean).norm() == 0.0);
}

TEST_CASE("diagnose composes the Gaussian divergence helpers verbatim") {
  Eigen::MatrixXd base = random_design(2, 2, 62);
  base = Eigen::MatrixXd(base.transpose() * base) + 2.0 * Eigen::MatrixXd::Identity(2, 2);
  const EfficientInfo eff = efficient_from_spd(base);

  PosteriorSummary summary;
  summary.mean = Eigen::VectorXd::LinSpaced(2, 0.1, 0.3);
  Eigen::MatrixXd cov = random_design(2, 2, 63);
  cov = Eigen::MatrixXd(cov.transpose() * cov) + 0.8 * eff.inverse;
  summary.cov = cov;

  const Eigen::VectorXd center = Eigen::VectorXd::Constant(2, -0.05);
  BvmBudget budget;
  budget.delta = 0.2;
  budget.x = 4.0;
  budget.mean_bound = 0.5;
  budget.cov_bound = 0.5;
  budget.tv_factor = std::exp(2.0 * budget.delta + 5.0 * std::exp(-budget.x));
  const BvmDiagnostic diag = diagnose(summary, center, eff, budget);

  const Eigen::VectorXd beta = eff.sqrt * (summary.mean - center);
  Eigen::MatrixXd standardized = eff.sqrt * summary.cov * eff.sqrt;
  standardized = (0.5 * (standardized + standardized.transpose())).eval();
  const Eigen::MatrixXd u = symmetric_inverse(symmetric_sqrt(standardized));
  CHECK(diag.mean_err == beta.squaredNorm());
  CHECK(diag.tv_est == tv_pinsker(kl_gaussians(u, beta)));
  CHECK(diag.cov_err ==
        operator_norm(Eigen::MatrixXd::Identity(2, 2) - standardized));

  const double tail = std::exp(-budget.x);
  const double expected_budget =
      std::min(1.0, std::max(budget.tv_factor - 1.0,
                             1.0 - std::exp(-2.0 * budget.delta - 8.0 * tail) + tail));
  CHECK(diag.tv_budget == expected_budget);

  BvmBudget wide = budget;
  wide.delta = 10.0;
  wide.tv_factor = std::exp(2.0 * wide.delta);
  CHECK(diagnose(summary, center, eff, wide).tv_budget == 1.0);

  CHECK_THROWS_AS(diagnose(summary, Eigen::VectorXd::Zero(3), eff, budget), DimensionMismatch);
}

TEST_CASE("diagnose covariance error is small for a large-count conjugate posterior") {
  const GroupedPoissonModel model = make_grouped_poisson(50, 10000);
  std::mt19937_64 rng(11);
  const Eigen::VectorXd z = sample_poisson_group_sums(model, rng);
  REQUIRE(z.minCoeff() > 0.0);

  const PosteriorSummary summary = sample_posterior_conjugate(model, z, 100000, 12);
  const EfficientInfo eff = schur_complement(poisson_full_fisher(model));

  BvmBudget budget;
  budget.mean_bound = 0.05;
  budget.cov_bound = 0.05;
  budget.tv_factor = 1.05;
  const BvmDiagnostic diag = diagnose(summary, summary.mean, eff, budget);
  CHECK(diag.cov_err <= 0.05);
  CHECK(diag.cov_ok);
}

TEST_CASE("diagnose covariance error is invariant under joint rescaling") {
  Eigen::MatrixXd base = random_design(2, 2, 64);
  base = Eigen::MatrixXd(base.transpose() * base) + 2.0 * Eigen::MatrixXd::Identity(2, 2);
  const EfficientInfo eff = efficient_from_spd(base);

  PosteriorSummary summary;
  summary.mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd cov = random_design(2, 2, 65);
  summary.cov = Eigen::MatrixXd(cov.transpose() * cov) + 0.9 * eff.inverse;

  const double c = 7.0;
  const EfficientInfo scaled = efficient_from_spd(base / c);
  PosteriorSummary scaled_summary = summary;
  scaled_summary.cov = summary.cov * c;

  const BvmBudget budget;
  const double a = diagnose(summary, summary.mean, eff, budget).cov_err;
  const double b = diagnose(scaled_summary, summary.mean, scaled, budget).cov_err;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("standardized draws are exact affine transforms") {
  PosteriorSummary summary;
  summary.draws = Eigen::MatrixXd::Constant(5, 1, 0.25);
  summary.mean = Eigen::VectorXd::Constant(1, 0.25);
  summary.cov = Eigen::MatrixXd::Zero(1, 1);
  summary.draw_count = 5;

  // Draws identical to the profile MLE map to zero.
  CHECK(standardized_target_draws(summary, 0.25, 400).norm() == 0.0);

  // Adding c / sqrt(m_n) shifts every standardized draw by c.
  const double c = 1.7;
  PosteriorSummary shifted = summary;
  shifted.draws.array() += c / 20.0;
  const Eigen::VectorXd t0 = standardized_target_draws(summary, 0.25, 400);
  const Eigen::VectorXd t1 = standardized_target_draws(shifted, 0.25, 400);
  CHECK((t1 - t0).cwiseAbs().maxCoeff() == doctest::Approx(c).epsilon(1e-12));
  CHECK((t1.array() - t0.array() - c).abs().maxCoeff() <= 1e-12);

  PosteriorSummary wide;
  wide.draws = Eigen::MatrixXd::Zero(5, 2);
  CHECK_THROWS_AS(standardized_target_draws(wide, 0.0, 4), DimensionMismatch);
  CHECK_THROWS_AS(standardized_target_draws(summary, 0.0, 0), InvalidInput);
}

TEST_CASE("standardized draws at the critical scaling show the half-shift") {
  // p_n = 1000 groups of 10^6 counts: the standardized posterior of the
  // target is close to N(1/2, 1) for a typical data realization.
  const GroupedPoissonModel model = make_grouped_poisson(1000, 1000000);
  std::mt19937_64 rng(2024);
  const Eigen::VectorXd z = sample_poisson_group_sums(model, rng);
  REQUIRE(z.minCoeff() > 0.0);

  const double tilde = poisson_profile_mle(z, model);
  const PosteriorSummary summary = sample_posterior_conjugate(model, z, 100000, 2025);
  const Eigen::VectorXd t = standardized_target_draws(summary, tilde, model.m_n);

  const double mean = t.mean();
  const double var = (t.array() - mean).square().sum() / double(t.size() - 1);
  CHECK(mean > 0.35);
  CHECK(mean < 0.65);
  CHECK(var > 0.85);
  CHECK(var < 1.15);
}

TEST_CASE("empirical total variation helper") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd draws(100000);
  for (Eigen::Index i = 0; i < draws.size(); ++i) draws(i) = gauss(rng);

  // Same law: the histogram estimate is small.
  CHECK(empirical_tv_1d(draws, 0.0, 1.0) <= 0.05);

  // Unit-variance laws three sigmas apart: TV = 2 Phi(1.5) - 1 = 0.8664.
  CHECK(std::abs(empirical_tv_1d(draws, 3.0, 1.0) - 0.8664) <= 0.05);

  CHECK(empirical_tv_1d(Eigen::VectorXd::Zero(10), 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS(empirical_tv_1d(Eigen::VectorXd(), 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(empirical_tv_1d(draws, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(empirical_tv_1d(draws, 0.0, 1.0, 0), InvalidInput);
}
