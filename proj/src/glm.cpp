#include "bvm/glm.hpp"

#include <cmath>
#include <limits>

#include "bvm/blockinfo.hpp"

namespace bvm {

namespace {

constexpr double kExpClamp = 700.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

GlmFamily glm_family_from_string(const std::string& name) {
  if (name == "gaussian") return GlmFamily::gaussian;
  if (name == "logistic") return GlmFamily::logistic;
  if (name == "poisson") return GlmFamily::poisson;
  if (name == "exponential") return GlmFamily::exponential;
  throw InvalidInput("unknown GLM family '" + name + "'");
}

std::string to_string(GlmFamily family) {
  switch (family) {
    case GlmFamily::gaussian: return "gaussian";
    case GlmFamily::logistic: return "logistic";
    case GlmFamily::poisson: return "poisson";
    case GlmFamily::exponential: return "exponential";
  }
  return "unknown";
}

double glm_cumulant(GlmFamily family, double w) {
  switch (family) {
    case GlmFamily::gaussian:
      return 0.5 * w * w;
    case GlmFamily::logistic:
      // log(1 + e^w), stable on both tails.
      return w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
    case GlmFamily::poisson:
      return std::exp(std::min(w, kExpClamp));
    case GlmFamily::exponential:
      return w < 0.0 ? -std::log(-w) : kInf;
  }
  return kInf;
}

double glm_cumulant_d1(GlmFamily family, double w) {
  switch (family) {
    case GlmFamily::gaussian:
      return w;
    case GlmFamily::logistic:
      return 1.0 / (1.0 + std::exp(-w));
    case GlmFamily::poisson:
      return std::exp(std::min(w, kExpClamp));
    case GlmFamily::exponential:
      if (w >= 0.0) throw InvalidInput("exponential family: derivative needs w < 0");
      return -1.0 / w;
  }
  throw InvalidInput("glm_cumulant_d1: unknown family");
}

double glm_cumulant_d2(GlmFamily family, double w) {
  switch (family) {
    case GlmFamily::gaussian:
      return 1.0;
    case GlmFamily::logistic: {
      const double s = 1.0 / (1.0 + std::exp(-w));
      return s * (1.0 - s);
    }
    case GlmFamily::poisson:
      return std::exp(std::min(w, kExpClamp));
    case GlmFamily::exponential:
      if (w >= 0.0) throw InvalidInput("exponential family: derivative needs w < 0");
      return 1.0 / (w * w);
  }
  throw InvalidInput("glm_cumulant_d2: unknown family");
}

GlmModel make_glm_model(const Eigen::MatrixXd& design, GlmFamily family,
                        const Eigen::VectorXd& responses, const Eigen::VectorXd& noise_scales,
                        double lipschitz_d2) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n < 1 || p < 1) throw DimensionMismatch("GlmModel: empty design");
  if (responses.size() != n) throw DimensionMismatch("GlmModel: responses must have n entries");
  if (noise_scales.size() != n) {
    throw DimensionMismatch("GlmModel: noise_scales must have n entries");
  }
  if ((noise_scales.array() <= 0.0).any()) {
    throw InvalidInput("GlmModel: noise_scales must be positive");
  }
  if (lipschitz_d2 < 0.0) throw InvalidInput("GlmModel: lipschitz_d2 must be non-negative");
  if (!full_column_rank(design)) throw RankDeficient("GlmModel: design is rank deficient");
  return GlmModel{design, family, responses, noise_scales, lipschitz_d2};
}

double glm_loglik(const Eigen::VectorXd& upsilon, const GlmModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("glm_loglik: upsilon size must match the design");
  }
  const Eigen::VectorXd w = model.design * upsilon;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double d = glm_cumulant(model.family, w(i));
    if (d == kInf) return -kInf;
    acc += model.responses(i) * w(i) - d;
  }
  return acc;
}

Eigen::VectorXd glm_grad(const Eigen::VectorXd& upsilon, const GlmModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("glm_grad: upsilon size must match the design");
  }
  const Eigen::VectorXd w = model.design * upsilon;
  Eigen::VectorXd resid(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    resid(i) = model.responses(i) - glm_cumulant_d1(model.family, w(i));
  }
  return model.design.transpose() * resid;
}

Eigen::MatrixXd glm_hessian(const Eigen::VectorXd& upsilon, const GlmModel& model) {
  if (upsilon.size() != model.design.cols()) {
    throw DimensionMismatch("glm_hessian: upsilon size must match the design");
  }
  const Eigen::VectorXd w = model.design * upsilon;
  Eigen::VectorXd weights(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    weights(i) = glm_cumulant_d2(model.family, w(i));
  }
  return -(model.design.transpose() * weights.asDiagonal() * model.design);
}

namespace {

// Feasible start for the exponential family: least-squares fit of the
// pointwise moment solution w_i = -1 / Y_i.
Eigen::VectorXd exponential_start(const GlmModel& model) {
  Eigen::VectorXd target(model.responses.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    target(i) = -1.0 / std::max(model.responses(i), 1e-8);
  }
  Eigen::VectorXd init = model.design.colPivHouseholderQr().solve(target);
  return init;
}

}  // namespace

Eigen::VectorXd glm_mle(const GlmModel& model, double tol, int max_iter, Eigen::VectorXd init) {
  if (!(tol > 0.0)) throw InvalidInput("glm_mle: tol must be positive");
  const Eigen::Index p = model.design.cols();
  Eigen::VectorXd ups;
  if (init.size() == 0) {
    ups = model.family == GlmFamily::exponential ? exponential_start(model)
                                                 : Eigen::VectorXd::Zero(p);
  } else {
    if (init.size() != p) throw DimensionMismatch("glm_mle: init size must match the design");
    ups = std::move(init);
  }
  double value = glm_loglik(ups, model);
  if (!std::isfinite(value)) {
    throw NonFiniteDensity("glm_mle: log-likelihood not finite at the starting point");
  }

  const double grad_scale = tol * (1.0 + model.responses.norm());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = glm_grad(ups, model);
    if (grad.norm() <= grad_scale) return ups;

    Eigen::MatrixXd neg_hess = -glm_hessian(ups, model);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
    // LLT can report success on an exactly singular consistent system, so
    // the Cholesky pivots are floored explicitly.
    const auto pivots = llt.matrixLLT().diagonal();
    const double pmin = pivots.minCoeff();
    const double pmax = pivots.maxCoeff();
    if (llt.info() != Eigen::Success || !(pmin * pmin > kSpdTol * pmax * pmax)) {
      throw SingularHessian("glm_mle: Hessian not negative definite");
    }
    const Eigen::VectorXd step = llt.solve(grad);

    double t = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Eigen::VectorXd trial = ups + t * step;
      const double trial_value = glm_loglik(trial, model);
      if (std::isfinite(trial_value) && trial_value >= value - 1e-14 * (1.0 + std::abs(value))) {
        ups = trial;
        value = trial_value;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) throw NoConvergence("glm_mle: line search failed to improve");
  }
  if (glm_grad(ups, model).norm() <= grad_scale) return ups;
  throw NoConvergence("glm_mle: iteration budget exhausted");
}

Eigen::MatrixXd glm_fisher(const Eigen::VectorXd& upsilon_star, const GlmModel& model) {
  if (upsilon_star.size() != model.design.cols()) {
    throw DimensionMismatch("glm_fisher: upsilon_star size must match the design");
  }
  return -glm_hessian(upsilon_star, model);
}

Eigen::MatrixXd glm_vmatrix(const GlmModel& model) {
  return model.design.transpose() * model.noise_scales.array().square().matrix().asDiagonal() *
         model.design;
}

double glm_excess(const Eigen::VectorXd& upsilon, const Eigen::VectorXd& upsilon_star,
                  const GlmModel& model) {
  if (upsilon.size() != model.design.cols() || upsilon_star.size() != model.design.cols()) {
    throw DimensionMismatch("glm_excess: parameter sizes must match the design");
  }
  const Eigen::VectorXd w = model.design * upsilon;
  const Eigen::VectorXd w0 = model.design * upsilon_star;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double d = glm_cumulant(model.family, w(i));
    if (d == kInf) return kInf;
    acc += d - glm_cumulant(model.family, w0(i)) -
           glm_cumulant_d1(model.family, w0(i)) * (w(i) - w0(i));
  }
  return acc;
}

double glm_delta_r(double r, const GlmModel& model, const Eigen::VectorXd& upsilon_star,
                   const Eigen::MatrixXd& fisher) {
  if (!(r >= 0.0)) throw InvalidInput("glm_delta_r: r must be non-negative");
  Eigen::LLT<Eigen::MatrixXd> llt(fisher);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("glm_delta_r: fisher not SPD");
  const Eigen::VectorXd w0 = model.design * upsilon_star;
  // The sup over directions gamma of |Psi_i^T gamma| / |D0 gamma| is attained
  // at gamma = D0^{-2} Psi_i and equals |D0^{-1} Psi_i|.
  double inv_sqrt_n2 = 0.0;
  for (Eigen::Index i = 0; i < model.design.rows(); ++i) {
    const Eigen::VectorXd psi = model.design.row(i).transpose();
    const double whitened = std::sqrt(psi.dot(llt.solve(psi)));
    const double d2 = glm_cumulant_d2(model.family, w0(i));
    inv_sqrt_n2 = std::max(inv_sqrt_n2, whitened / d2);
  }
  return model.lipschitz_d2 * r * inv_sqrt_n2;
}

Eigen::VectorXd sample_glm_responses(const Eigen::MatrixXd& design, GlmFamily family,
                                     const Eigen::VectorXd& upsilon_star, std::mt19937_64& rng) {
  if (upsilon_star.size() != design.cols()) {
    throw DimensionMismatch("sample_glm_responses: upsilon_star size must match the design");
  }
  const Eigen::VectorXd w = design * upsilon_star;
  Eigen::VectorXd y(design.rows());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    switch (family) {
      case GlmFamily::gaussian:
        y(i) = w(i) + gauss(rng);
        break;
      case GlmFamily::logistic:
        y(i) = unif(rng) < 1.0 / (1.0 + std::exp(-w(i))) ? 1.0 : 0.0;
        break;
      case GlmFamily::poisson: {
        std::poisson_distribution<long long> pois(std::exp(std::min(w(i), 30.0)));
        y(i) = double(pois(rng));
        break;
      }
      case GlmFamily::exponential: {
        if (w(i) >= 0.0) {
          throw InvalidInput("sample_glm_responses: exponential family needs w < 0");
        }
        std::exponential_distribution<double> expo(-w(i));
        y(i) = expo(rng);
        break;
      }
    }
  }
  return y;
}

}  // namespace bvm
