#include "bvm/blockinfo.hpp"

#include <string>

namespace bvm {

namespace {

// Eigendecomposition that enforces the SPD floor lambda_min > kSpdTol * lambda_max.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spd_eigen(const Eigen::MatrixXd& m,
                                                         const char* label) {
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(label) + ": eigendecomposition failed");
  }
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > kSpdTol * hi)) {
    throw NotPositiveDefinite(std::string(label) + ": eigenvalue floor violated");
  }
  return es;
}

void check_symmetric(const Eigen::MatrixXd& m, const char* label) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-12 * (1.0 + scale)) {
    throw DimensionMismatch(std::string(label) + ": matrix is not symmetric");
  }
}

}  // namespace

Eigen::MatrixXd FullInfo::assembled() const {
  Eigen::MatrixXd full(p + q, p + q);
  full.topLeftCorner(p, p) = target_block;
  full.topRightCorner(p, q) = cross_block;
  full.bottomLeftCorner(q, p) = cross_block.transpose();
  full.bottomRightCorner(q, q) = nuisance_block;
  return full;
}

FullInfo make_full_info(const Eigen::MatrixXd& target_block,
                        const Eigen::MatrixXd& cross_block,
                        const Eigen::MatrixXd& nuisance_block) {
  const Eigen::Index p = target_block.rows();
  const Eigen::Index q = nuisance_block.rows();
  if (target_block.cols() != p || nuisance_block.cols() != q) {
    throw DimensionMismatch("make_full_info: diagonal blocks must be square");
  }
  if (cross_block.rows() != p || cross_block.cols() != q) {
    throw DimensionMismatch("make_full_info: cross block must be p x q");
  }
  check_symmetric(target_block, "target_block");
  check_symmetric(nuisance_block, "nuisance_block");
  spd_eigen(target_block, "target_block");
  spd_eigen(nuisance_block, "nuisance_block");
  return FullInfo{target_block, cross_block, nuisance_block, p, q};
}

FullInfo split_full_info(const Eigen::MatrixXd& assembled, Eigen::Index p) {
  if (assembled.rows() != assembled.cols() || p <= 0 || p >= assembled.rows()) {
    throw DimensionMismatch("split_full_info: invalid partition");
  }
  const Eigen::Index q = assembled.rows() - p;
  return make_full_info(assembled.topLeftCorner(p, p), assembled.topRightCorner(p, q),
                        assembled.bottomRightCorner(q, q));
}

EfficientInfo schur_complement(const FullInfo& info) {
  auto nuis = spd_eigen(info.nuisance_block, "nuisance_block");
  // A0 H0^{-2} A0^T through the eigenbasis of H0^2.
  Eigen::MatrixXd w = nuis.eigenvectors().transpose() * info.cross_block.transpose();
  Eigen::MatrixXd correction =
      w.transpose() * nuis.eigenvalues().cwiseInverse().asDiagonal() * w;
  Eigen::MatrixXd schur = info.target_block - correction;
  auto es = spd_eigen(schur, "schur_complement");

  EfficientInfo out;
  out.matrix = 0.5 * (schur + schur.transpose());
  const auto& v = es.eigenvectors();
  out.inverse = v * es.eigenvalues().cwiseInverse().asDiagonal() * v.transpose();
  out.sqrt = v * es.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
  return out;
}

Eigen::VectorXd efficient_score(const FullInfo& info, const FullScore& score) {
  if (score.target_grad.size() != info.p || score.nuisance_grad.size() != info.q) {
    throw DimensionMismatch("efficient_score: score dimensions do not match info");
  }
  EfficientInfo eff = schur_complement(info);
  Eigen::VectorXd corrected =
      score.target_grad -
      info.cross_block * info.nuisance_block.ldlt().solve(score.nuisance_grad);
  // D̆0^{-1} b solves D̆0 x = b; the square root is SPD.
  return eff.sqrt.llt().solve(corrected);
}

IdentifiabilityReport identifiability(const FullInfo& info, const Eigen::MatrixXd& v_full) {
  const Eigen::Index n = info.p + info.q;
  if (v_full.rows() != n || v_full.cols() != n) {
    throw DimensionMismatch("identifiability: v_full must be (p+q) x (p+q)");
  }
  check_symmetric(v_full, "v_full");

  // nu = |D0^{-1} A0 H0^{-2} A0^T D0^{-1}|.
  auto targ = spd_eigen(info.target_block, "target_block");
  Eigen::MatrixXd d_inv_sqrt = targ.eigenvectors() *
                               targ.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                               targ.eigenvectors().transpose();
  auto nuis = spd_eigen(info.nuisance_block, "nuisance_block");
  Eigen::MatrixXd w = nuis.eigenvectors().transpose() * (d_inv_sqrt * info.cross_block).transpose();
  Eigen::MatrixXd angle = w.transpose() * nuis.eigenvalues().cwiseInverse().asDiagonal() * w;

  // Largest generalized eigenvalue of (V^2, D^2) after whitening by D^2.
  auto a_scale = [](const Eigen::MatrixXd& v2, const Eigen::MatrixXd& d2, const char* label) {
    auto es = spd_eigen(d2, label);
    Eigen::MatrixXd inv_sqrt = es.eigenvectors() *
                               es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
    Eigen::MatrixXd white = inv_sqrt * v2 * inv_sqrt;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ws(0.5 * (white + white.transpose()));
    return std::sqrt(std::max(0.0, ws.eigenvalues().maxCoeff()));
  };

  IdentifiabilityReport rep;
  rep.nu = operator_norm(angle);
  rep.a_target = a_scale(v_full.topLeftCorner(info.p, info.p), info.target_block, "target_block");
  rep.a_nuisance =
      a_scale(v_full.bottomRightCorner(info.q, info.q), info.nuisance_block, "nuisance_block");
  rep.a_full = a_scale(v_full, info.assembled(), "assembled");
  rep.nu_ok = rep.nu < 1.0;
  return rep;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  auto es = spd_eigen(m, "symmetric_sqrt");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m) {
  auto es = spd_eigen(m, "symmetric_inverse");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

double operator_norm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool full_column_rank(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return true;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return qr.rank() == m.cols();
}

}  // namespace bvm
