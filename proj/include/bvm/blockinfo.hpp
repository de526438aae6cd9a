#pragma once

#include <Eigen/Dense>

#include "bvm/errors.hpp"

namespace bvm {

// Relative eigenvalue floor below which a symmetric matrix is rejected as not
// positive definite. Applied as: lambda_min > kSpdTol * lambda_max.
inline constexpr double kSpdTol = 1e-10;

// Partitioned information matrix
//
//     [ D0^2   A0   ]     p  target rows
//     [ A0^T   H0^2 ]     q  nuisance rows
//
// target_block and nuisance_block must be symmetric positive definite.
struct FullInfo {
  Eigen::MatrixXd target_block;    // D0^2, p x p
  Eigen::MatrixXd cross_block;     // A0,   p x q
  Eigen::MatrixXd nuisance_block;  // H0^2, q x q
  Eigen::Index p = 0;
  Eigen::Index q = 0;

  // The assembled (p+q) x (p+q) symmetric matrix.
  Eigen::MatrixXd assembled() const;
};

// Validates block dimensions, symmetry and positive definiteness.
// Throws DimensionMismatch or NotPositiveDefinite.
FullInfo make_full_info(const Eigen::MatrixXd& target_block,
                        const Eigen::MatrixXd& cross_block,
                        const Eigen::MatrixXd& nuisance_block);

// Splits an assembled SPD matrix into a FullInfo with target dimension p.
FullInfo split_full_info(const Eigen::MatrixXd& assembled, Eigen::Index p);

// Efficient information: the Schur complement of the nuisance block,
// together with its inverse and symmetric square root.
struct EfficientInfo {
  Eigen::MatrixXd matrix;   // D̆0^2
  Eigen::MatrixXd inverse;  // D̆0^{-2}
  Eigen::MatrixXd sqrt;     // D̆0
};

// Score vector split conformally with FullInfo.
struct FullScore {
  Eigen::VectorXd target_grad;    // grad w.r.t. theta
  Eigen::VectorXd nuisance_grad;  // grad w.r.t. eta
};

struct IdentifiabilityReport {
  double nu = 0.0;          // |D0^{-1} A0 H0^{-2} A0^T D0^{-1}|, operator norm
  double a_target = 0.0;    // smallest a with a^2 D0^2 >= V_theta^2
  double a_nuisance = 0.0;  // smallest a with a^2 H0^2 >= V_eta^2
  double a_full = 0.0;      // same for the assembled blocks
  bool nu_ok = false;       // identifiability condition: nu < 1
};

// D̆0^2 = D0^2 - A0 H0^{-2} A0^T. Throws NotPositiveDefinite when the
// nuisance block or the complement fails the eigenvalue floor.
EfficientInfo schur_complement(const FullInfo& info);

// xi = D̆0^{-1} (target_grad - A0 H0^{-2} nuisance_grad).
Eigen::VectorXd efficient_score(const FullInfo& info, const FullScore& score);

// Angle bound nu and per-block scale factors a_* for a second matrix v_full
// (typically the variance of the score) partitioned conformally with info.
IdentifiabilityReport identifiability(const FullInfo& info, const Eigen::MatrixXd& v_full);

// Symmetric eigendecomposition helpers used throughout the library.
// All inputs are symmetrized before factorization.

// Square root of an SPD matrix. Throws NotPositiveDefinite.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m);

// Inverse of an SPD matrix via eigendecomposition. Throws NotPositiveDefinite.
Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m);

// Operator norm (largest absolute eigenvalue) of a symmetric matrix.
double operator_norm(const Eigen::MatrixXd& m);

// True when m has full column rank, judged at a 1e-10 relative pivot floor.
// The default QR threshold (machine epsilon) passes numerically duplicated
// columns, so a coarser floor is used.
bool full_column_rank(const Eigen::MatrixXd& m);

}  // namespace bvm
